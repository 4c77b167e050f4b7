#include "motionid/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "motionid/gbdt.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

namespace {

// Fills prob with the softmax of X W^T and returns the penalized mean loss.
double objective(const Matrix& rows, const std::vector<std::size_t>& label, const Matrix& w,
                 double l2, Matrix& prob) {
  const std::size_t classes = w.rows();
  const std::size_t features = rows.cols();
  double loss = 0.0;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto x = rows.row(r);
    auto p = prob.row(r);
    for (std::size_t k = 0; k < classes; ++k) {
      const auto wk = w.row(k);
      double z = wk[features];
      for (std::size_t f = 0; f < features; ++f) z += wk[f] * x[f];
      p[k] = z;
    }
    softmax_in_place(p);
    loss -= std::log(std::max(p[label[r]], 1e-300));
  }
  loss /= static_cast<double>(rows.rows());
  double penalty = 0.0;
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t f = 0; f < features; ++f) penalty += w(k, f) * w(k, f);
  }
  return loss + 0.5 * l2 * penalty;
}

}  // namespace

LogisticModel fit_logistic_baseline(const Matrix& rows, std::span<const ClassLabel> labels,
                                    const LogisticConfig& config) {
  if (rows.rows() != labels.size()) throw ModelError("row and label counts differ");
  if (rows.rows() == 0) throw ModelError("no training rows");
  if (config.l2 < 0.0 || config.max_iterations < 0) throw ModelError("invalid logistic config");
  LogisticModel model;
  model.classes_ = distinct_classes(labels);
  model.features_ = rows.cols();
  const std::size_t classes = model.classes_.size();
  const std::size_t features = rows.cols();
  const std::size_t n = rows.rows();
  model.weights_ = Matrix(classes, features + 1, 0.0);
  if (classes == 1) return model;

  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = static_cast<std::size_t>(
        std::lower_bound(model.classes_.begin(), model.classes_.end(), labels[i]) -
        model.classes_.begin());
  }

  Matrix& w = model.weights_;
  Matrix prob(n, classes), trial_prob(n, classes), grad(classes, features + 1);
  double current = objective(rows, label, w, config.l2, prob);
  double step = 1.0;
  for (int it = 0; it < config.max_iterations; ++it) {
    std::fill(grad.data().begin(), grad.data().end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto x = rows.row(r);
      for (std::size_t k = 0; k < classes; ++k) {
        const double d = prob(r, k) - (label[r] == k ? 1.0 : 0.0);
        auto g = grad.row(k);
        for (std::size_t f = 0; f < features; ++f) g[f] += d * x[f];
        g[features] += d;
      }
    }
    double norm2 = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      for (std::size_t f = 0; f <= features; ++f) {
        double& g = grad(k, f);
        g /= static_cast<double>(n);
        if (f < features) g += config.l2 * w(k, f);
        norm2 += g * g;
      }
    }
    if (norm2 == 0.0) break;

    // Armijo backtracking from a step that grows after each success.
    step *= 2.0;
    Matrix trial;
    double next = current;
    while (step > 1e-12) {
      trial = w;
      for (std::size_t i = 0; i < trial.data().size(); ++i) trial.data()[i] -= step * grad.data()[i];
      next = objective(rows, label, trial, config.l2, trial_prob);
      if (next <= current - 0.5 * step * norm2) break;
      step /= 2.0;
    }
    if (step <= 1e-12) break;
    w = std::move(trial);
    std::swap(prob, trial_prob);
    const double improvement = current - next;
    current = next;
    if (improvement < config.tolerance) break;
  }
  return model;
}

Matrix LogisticModel::predict_proba(const Matrix& rows) const {
  if (classes_.empty()) throw ModelError("model is not trained");
  if (rows.cols() != features_) {
    throw ModelError("dimension mismatch: " + std::to_string(rows.cols()) + " columns, model has " +
                     std::to_string(features_));
  }
  Matrix out(rows.rows(), classes_.size());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto x = rows.row(r);
    auto p = out.row(r);
    for (std::size_t k = 0; k < classes_.size(); ++k) {
      const auto wk = weights_.row(k);
      double z = wk[features_];
      for (std::size_t f = 0; f < features_; ++f) z += wk[f] * x[f];
      p[k] = z;
    }
    softmax_in_place(p);
  }
  return out;
}

void LogisticModel::save(std::ostream& out) const {
  out << "LOGIT1\n";
  out << "features " << features_ << '\n';
  out << "classes " << classes_.size();
  for (ClassLabel label : classes_) out << ' ' << label;
  out << '\n';
  for (std::size_t k = 0; k < weights_.rows(); ++k) {
    out << "w";
    for (double v : weights_.row(k)) out << ' ' << text::format_exact(v);
    out << '\n';
  }
  out << "end\n";
}

LogisticModel LogisticModel::load(std::istream& in) {
  auto next = [&in]() {
    std::string line;
    if (!std::getline(in, line)) throw ModelError("truncated model file");
    return line;
  };
  auto fields = [](const std::string& line) {
    std::vector<std::string_view> out;
    for (auto token : text::split(line, ' ')) {
      if (!token.empty()) out.push_back(token);
    }
    return out;
  };
  if (text::trim(next()) != "LOGIT1") throw ModelError("not a LOGIT1 model");
  LogisticModel model;
  {
    const std::string line = next();
    const auto tokens = fields(line);
    if (tokens.size() != 2 || tokens[0] != "features") throw ModelError("missing features line");
    model.features_ = text::parse_uint(tokens[1]);
  }
  {
    const std::string line = next();
    const auto tokens = fields(line);
    if (tokens.size() < 2 || tokens[0] != "classes") throw ModelError("missing classes line");
    const auto count = text::parse_uint(tokens[1]);
    if (tokens.size() != count + 2) throw ModelError("class count mismatch");
    for (std::size_t i = 0; i < count; ++i) {
      model.classes_.push_back(static_cast<ClassLabel>(text::parse_int(tokens[2 + i])));
    }
  }
  model.weights_ = Matrix(model.classes_.size(), model.features_ + 1);
  for (std::size_t k = 0; k < model.classes_.size(); ++k) {
    const std::string line = next();
    const auto tokens = fields(line);
    if (tokens.size() != model.features_ + 2 || tokens[0] != "w") throw ModelError("malformed weight row");
    for (std::size_t f = 0; f <= model.features_; ++f) model.weights_(k, f) = text::parse_double(tokens[1 + f]);
  }
  if (text::trim(next()) != "end") throw ModelError("missing end marker");
  return model;
}

ClassifierTrainer logistic_trainer(const LogisticConfig& config) {
  return [config](const Matrix& rows, std::span<const ClassLabel> labels, std::uint64_t) {
    return std::make_shared<const LogisticModel>(fit_logistic_baseline(rows, labels, config));
  };
}

}  // namespace motionid
