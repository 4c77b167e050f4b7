#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motionid/error.hpp"
#include "motionid/featurizer.hpp"
#include "motionid/hierarchy.hpp"
#include "motionid/matrix.hpp"

namespace motionid {

class EvalError : public Error {
 public:
  explicit EvalError(const std::string& message) : Error("evaluator", message) {}
};

// Anything that turns samples into ranked identities.
class Identifier {
 public:
  virtual ~Identifier() = default;

  virtual std::span<const std::string> users() const = 0;
  // Additive per-sample scores, samples x users.
  virtual Matrix sample_scores(const Matrix& samples) const = 0;
  // Ranking for an aggregate score row over the given samples. The default
  // ranks by score with the lexicographic tie rule.
  virtual std::vector<UserIndex> decide(std::span<const double> aggregate,
                                        const Matrix& samples) const;
};

class HierarchyIdentifier final : public Identifier {
 public:
  HierarchyIdentifier(const HierarchicalModel& model, LayerMode mode)
      : model_(model), mode_(mode) {}

  std::span<const std::string> users() const override { return model_.users; }
  Matrix sample_scores(const Matrix& samples) const override;
  std::vector<UserIndex> decide(std::span<const double> aggregate,
                                const Matrix& samples) const override;

 private:
  const HierarchicalModel& model_;
  LayerMode mode_;
};

// A user's test samples in deterministic order; session_ids is per row.
struct TestSet {
  UserIndex user = 0;
  Matrix samples;
  std::vector<std::string> session_ids;
};

struct EvalOptions {
  std::size_t samples_per_user = 50;
  std::vector<std::size_t> top_k = {1, 3, 5};
  std::vector<std::size_t> curve_counts = {1, 5, 15, 30, 50};
  // When set, every evaluated sample's session must be in this set.
  const std::set<std::string>* test_sessions = nullptr;
};

struct UserOutcome {
  UserIndex user = 0;
  bool correct = false;
  std::size_t rank = 0;  // 1-based rank of the true user
  std::size_t samples = 0;
  std::size_t samples_correct = 0;
};

struct EvalReport {
  double per_sample_accuracy = 0.0;
  double per_user_accuracy = 0.0;
  std::map<std::size_t, double> top_k_accuracies;
  std::map<std::size_t, double> accuracy_by_sample_count;
  std::map<std::pair<std::string, std::string>, double> group_accuracies;
  std::map<std::pair<std::string, std::string>, std::size_t> group_sizes;
  std::map<std::string, double> importance_by_type;
  std::size_t users_evaluated = 0;
  std::size_t users_excluded = 0;  // no test samples
  std::size_t samples_evaluated = 0;
  std::vector<UserOutcome> outcomes;

  double seconds_per_user(std::size_t samples) const { return 2.0 * static_cast<double>(samples); }
};

EvalReport evaluate(const Identifier& identifier, std::span<const TestSet> tests,
                    const EvalOptions& options = {});

// Per-user accuracy when aggregating only the first `count` samples.
std::map<std::size_t, double> accuracy_curve(const Identifier& identifier,
                                             std::span<const TestSet> tests,
                                             std::span<const std::size_t> counts);

// Attributes for the key-factor analysis. Missing values land in "unknown".
struct UserAttributes {
  std::string headset, platform, country, handedness;
  std::optional<double> height;
  std::optional<std::size_t> replay_count;
};

std::string replay_count_band(std::optional<std::size_t> replays);
std::string height_band(std::optional<double> height);

// Per-user correctness averaged within buckets of each attribute.
void impact_factors(EvalReport& report, std::span<const UserAttributes> attributes);

// Gain fractions of layer 1-2 GBDT models summed per feature kind, then
// normalized to sum to 1.
std::map<std::string, double> importance_by_type(const HierarchicalModel& model,
                                                 std::span<const FeatureKind> schema);

// "key = value" lines; see README for the schema.
void write_report(const EvalReport& report, std::ostream& out);
// "user_id,correct,rank,samples,samples_correct" lines.
void write_user_outcomes(const EvalReport& report, std::span<const std::string> user_ids,
                         std::ostream& out);

}  // namespace motionid
