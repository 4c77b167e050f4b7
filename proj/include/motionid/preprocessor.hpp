#pragma once

#include <iosfwd>
#include <vector>

#include "motionid/error.hpp"
#include "motionid/matrix.hpp"

namespace motionid {

// Z-score standardization with statistics from the training matrix only.
struct Scaler {
  std::size_t dim = 0;
  std::vector<double> means;
  std::vector<double> scales;  // population stdev, 1.0 for constant columns

  bool operator==(const Scaler&) const = default;
};

class ScalerError : public Error {
 public:
  explicit ScalerError(const std::string& message) : Error("preprocessor", message) {}
};

inline constexpr double kMinScale = 1e-12;

Scaler fit_scaler(const Matrix& training);
Matrix transform(const Scaler& scaler, const Matrix& input);
void transform_in_place(const Scaler& scaler, Matrix& values);
void transform_in_place(const Scaler& scaler, std::vector<double>& row);

// "SCALER1,dim" then "index,mean,scale" per feature.
void write_scaler(const Scaler& scaler, std::ostream& out);
Scaler read_scaler(std::istream& in);

}  // namespace motionid
