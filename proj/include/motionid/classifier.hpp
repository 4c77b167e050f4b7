#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "motionid/error.hpp"
#include "motionid/matrix.hpp"

namespace motionid {

using ClassLabel = std::int32_t;

class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message) : Error("boosted_trees", message) {}
};

// Base classifier contract shared by the hierarchy's group models.
// predict_proba returns one row per input row and one column per entry of
// classes(), in that order; every row lies on the probability simplex.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual const std::vector<ClassLabel>& classes() const = 0;
  virtual std::size_t feature_count() const = 0;
  virtual Matrix predict_proba(const Matrix& rows) const = 0;
  // Serialized form; the first line names the format ("GBDT1", "LOGIT1").
  virtual void save(std::ostream& out) const = 0;
};

// Trains a classifier on labeled rows. The seed lets callers derive
// independent but reproducible streams per model.
using ClassifierTrainer = std::function<std::shared_ptr<const Classifier>(
    const Matrix& rows, std::span<const ClassLabel> labels, std::uint64_t seed)>;

// Reads any supported format by sniffing its header line.
std::shared_ptr<const Classifier> load_classifier(std::istream& in);

// Sorted distinct labels; throws on empty input.
std::vector<ClassLabel> distinct_classes(std::span<const ClassLabel> labels);

}  // namespace motionid
