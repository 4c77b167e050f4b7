#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "motionid/classifier.hpp"

namespace motionid {

struct GbdtConfig {
  double learning_rate = 0.1;
  int n_estimators = 200;  // boosting rounds
  int num_leaves = 33;
  int max_bin = 63;
  int min_data_in_leaf = 20;
  double min_child_weight = 7.0;  // minimum hessian sum per child
  double min_split_gain = 0.9473684210526315;
  double reg_alpha = 0.7894736842105263;
  double reg_lambda = 0.894736842105263;
  double colsample_bytree = 0.6933333333333332;
  int max_depth = -1;  // unlimited
  bool goss_enabled = false;
  double goss_top_rate = 0.2;
  double goss_other_rate = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const GbdtConfig&) const = default;
};

// Quantile bin edges of one feature. A value x falls in the first bin b with
// x <= edges[b]; values above every edge fall in the last bin.
struct BinEdges {
  std::vector<double> edges;
  std::size_t bin_count() const { return edges.size() + 1; }
  std::uint8_t bin(double value) const;
  bool operator==(const BinEdges&) const = default;
};

std::vector<BinEdges> compute_bin_edges(const Matrix& rows, int max_bin);

// Tree stored in preorder. Internal nodes send x[feature] <= threshold left.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  std::uint16_t bin = 0;
  double threshold = 0.0;
  double gain = 0.0;
  double value = 0.0;  // leaf output, already shrunk by the learning rate
  std::int32_t left = -1;
  std::int32_t right = -1;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const;
  double predict_binned(const std::uint8_t* bins) const;
  std::size_t leaf_count() const;
  bool operator==(const Tree&) const = default;
};

class GbdtModel final : public Classifier {
 public:
  GbdtModel() = default;

  const std::vector<ClassLabel>& classes() const override { return classes_; }
  std::size_t feature_count() const override { return bins_.size(); }
  Matrix predict_proba(const Matrix& rows) const override;
  void save(std::ostream& out) const override;

  // Per-class summed tree outputs, before the softmax.
  Matrix predict_raw(const Matrix& rows) const;

  const GbdtConfig& config() const { return config_; }
  const std::vector<BinEdges>& bins() const { return bins_; }
  // trees()[class][round]
  const std::vector<std::vector<Tree>>& trees() const { return trees_; }
  std::vector<std::vector<Tree>>& mutable_trees() { return trees_; }
  // Mean training multiclass log-loss after each round (index 0 = before any
  // tree). Not serialized.
  const std::vector<double>& training_loss() const { return training_loss_; }

  static GbdtModel load(std::istream& in);

  bool operator==(const GbdtModel& other) const {
    return config_ == other.config_ && classes_ == other.classes_ && bins_ == other.bins_ &&
           trees_ == other.trees_;
  }

 private:
  friend GbdtModel fit_gbdt(const Matrix&, std::span<const ClassLabel>, const GbdtConfig&);

  GbdtConfig config_;
  std::vector<ClassLabel> classes_;
  std::vector<BinEdges> bins_;
  std::vector<std::vector<Tree>> trees_;
  std::vector<double> training_loss_;
};

// Multiclass softmax boosting: per round, one regression tree per class on
// the softmax gradients and hessians, grown leaf-wise on histogram bins.
// A single-class input yields a constant model.
GbdtModel fit_gbdt(const Matrix& rows, std::span<const ClassLabel> labels,
                   const GbdtConfig& config);

ClassifierTrainer gbdt_trainer(const GbdtConfig& config);

struct FeatureImportance {
  std::vector<double> split_fraction;
  std::vector<double> gain_fraction;
  std::vector<std::size_t> split_count;
  std::vector<double> total_gain;
};

// Throws for models without any split.
FeatureImportance feature_importance(const GbdtModel& model);

// Softmax of a score row, written in place; max-shifted for stability.
void softmax_in_place(std::span<double> scores);

}  // namespace motionid
