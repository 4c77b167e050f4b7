#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "motionid/classifier.hpp"

namespace motionid {

struct LogisticConfig {
  double l2 = 1e-4;
  int max_iterations = 500;
  double tolerance = 1e-10;  // stop when the objective improves less than this
};

// Multinomial logistic regression with an L2 penalty on the weights (not the
// intercepts), fitted by full-batch gradient descent with backtracking.
class LogisticModel final : public Classifier {
 public:
  const std::vector<ClassLabel>& classes() const override { return classes_; }
  std::size_t feature_count() const override { return features_; }
  Matrix predict_proba(const Matrix& rows) const override;
  void save(std::ostream& out) const override;

  static LogisticModel load(std::istream& in);

  // weights()(class, feature); the last column is the intercept.
  const Matrix& weights() const { return weights_; }

 private:
  friend LogisticModel fit_logistic_baseline(const Matrix&, std::span<const ClassLabel>,
                                             const LogisticConfig&);
  std::vector<ClassLabel> classes_;
  std::size_t features_ = 0;
  Matrix weights_;
};

LogisticModel fit_logistic_baseline(const Matrix& rows, std::span<const ClassLabel> labels,
                                    const LogisticConfig& config = {});

ClassifierTrainer logistic_trainer(const LogisticConfig& config = {});

}  // namespace motionid
