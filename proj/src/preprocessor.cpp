#include "motionid/preprocessor.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "motionid/text_io.hpp"

namespace motionid {

Scaler fit_scaler(const Matrix& training) {
  if (training.rows() < 2) throw ScalerError("need at least 2 rows to fit a scaler");
  Scaler scaler;
  scaler.dim = training.cols();
  scaler.means.assign(scaler.dim, 0.0);
  scaler.scales.assign(scaler.dim, 0.0);
  const double n = static_cast<double>(training.rows());
  for (std::size_t r = 0; r < training.rows(); ++r) {
    const auto row = training.row(r);
    for (std::size_t c = 0; c < scaler.dim; ++c) scaler.means[c] += row[c];
  }
  for (double& mean : scaler.means) mean /= n;
  for (std::size_t r = 0; r < training.rows(); ++r) {
    const auto row = training.row(r);
    for (std::size_t c = 0; c < scaler.dim; ++c) {
      const double d = row[c] - scaler.means[c];
      scaler.scales[c] += d * d;
    }
  }
  for (double& scale : scaler.scales) {
    scale = std::sqrt(scale / n);
    if (!(scale >= kMinScale)) scale = 1.0;
  }
  return scaler;
}

void transform_in_place(const Scaler& scaler, std::vector<double>& row) {
  if (row.size() != scaler.dim) {
    throw ScalerError("dimension mismatch: " + std::to_string(row.size()) + " vs scaler " +
                      std::to_string(scaler.dim));
  }
  for (std::size_t c = 0; c < scaler.dim; ++c) row[c] = (row[c] - scaler.means[c]) / scaler.scales[c];
}

void transform_in_place(const Scaler& scaler, Matrix& values) {
  if (values.cols() != scaler.dim && !values.empty()) {
    throw ScalerError("dimension mismatch: " + std::to_string(values.cols()) + " vs scaler " +
                      std::to_string(scaler.dim));
  }
  for (std::size_t r = 0; r < values.rows(); ++r) {
    auto row = values.row(r);
    for (std::size_t c = 0; c < scaler.dim; ++c) row[c] = (row[c] - scaler.means[c]) / scaler.scales[c];
  }
}

Matrix transform(const Scaler& scaler, const Matrix& input) {
  Matrix out = input;
  transform_in_place(scaler, out);
  return out;
}

void write_scaler(const Scaler& scaler, std::ostream& out) {
  out << "SCALER1," << scaler.dim << '\n';
  for (std::size_t i = 0; i < scaler.dim; ++i) {
    out << i << ',' << text::format_exact(scaler.means[i]) << ','
        << text::format_exact(scaler.scales[i]) << '\n';
  }
}

Scaler read_scaler(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ScalerError("scaler file is empty");
  const auto header = text::split(text::trim(line), ',');
  if (header.size() != 2 || header[0] != "SCALER1") throw ScalerError("bad scaler header");
  Scaler scaler;
  scaler.dim = text::parse_uint(header[1]);
  scaler.means.resize(scaler.dim);
  scaler.scales.resize(scaler.dim);
  for (std::size_t i = 0; i < scaler.dim; ++i) {
    if (!std::getline(in, line)) throw ScalerError("scaler file is truncated");
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != 3 || text::parse_uint(fields[0]) != i) {
      throw ScalerError("malformed scaler record " + std::to_string(i));
    }
    scaler.means[i] = text::parse_double(fields[1]);
    scaler.scales[i] = text::parse_double(fields[2]);
    if (!(scaler.scales[i] > 0.0)) throw ScalerError("non-positive scale");
  }
  return scaler;
}

}  // namespace motionid
