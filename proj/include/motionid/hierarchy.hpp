#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motionid/classifier.hpp"
#include "motionid/error.hpp"
#include "motionid/matrix.hpp"

namespace motionid {

class HierarchyError : public Error {
 public:
  explicit HierarchyError(const std::string& message) : Error("hierarchy", message) {}
};

using UserIndex = std::size_t;
using UserGroups = std::vector<std::vector<UserIndex>>;

struct LayerPartition {
  int layer_index = 1;
  UserGroups groups;
  std::vector<std::shared_ptr<const Classifier>> models;  // one per group
};

// Undirected multigraph over user indices.
class ConfusionGraph {
 public:
  explicit ConfusionGraph(std::size_t nodes = 0) : nodes_(nodes) {}

  void add_edge(UserIndex a, UserIndex b);
  std::size_t node_count() const { return nodes_; }
  const std::vector<std::pair<UserIndex, UserIndex>>& edges() const { return edges_; }

 private:
  std::size_t nodes_;
  std::vector<std::pair<UserIndex, UserIndex>> edges_;
};

// Components with more than one member, each sorted, ordered by first member.
UserGroups connected_components(const ConfusionGraph& graph);

struct HierarchyConfig {
  std::size_t groups_per_layer = 10;
  std::uint64_t seed = 0;
  std::size_t max_component_size = 5500;
  std::size_t similar_users = 5;
  double epsilon = 1e-12;
  std::size_t parallelism = 0;  // 0 = all hardware threads
};

// Per-user training matrices; user index = position.
struct TrainingSet {
  std::vector<std::string> user_ids;
  std::vector<Matrix> samples;

  std::size_t user_count() const { return user_ids.size(); }
  std::size_t feature_count() const;
  // Stacked rows and labels for the listed users.
  std::pair<Matrix, std::vector<ClassLabel>> stack(std::span<const UserIndex> users) const;
};

// The samples of one user drawn from one session (or one evaluation block).
struct Presentation {
  UserIndex user = 0;
  std::string session_id;
  Matrix samples;
};

enum class LayerMode : std::uint8_t { layer1, layers12, full };

struct HierarchicalModel {
  std::vector<std::string> users;
  std::array<LayerPartition, 2> layers;
  UserGroups components;
  std::vector<std::shared_ptr<const Classifier>> component_models;
  HierarchyConfig config;
  bool layer3_stale = false;

  std::size_t user_count() const { return users.size(); }
  std::optional<std::size_t> component_of(UserIndex user) const;
  std::optional<UserIndex> find_user(const std::string& user_id) const;
};

// Seeded shuffle dealt round-robin into n_groups (sizes differ by <= 1).
// Layer 2 redistributes every layer-1 group evenly across the layer-2
// groups, using a seed derived from the layer-1 seed.
UserGroups partition_users(std::size_t user_count, std::size_t n_groups, std::uint64_t seed,
                           int layer_index);

// Probability of every user (columns) for every sample (rows): each group
// model's output placed in its members' columns, no cross-group
// renormalization.
Matrix layer_predict(const LayerPartition& layer, std::size_t user_count, const Matrix& samples);

// ln(p1 + eps) + ln(p2 + eps) per user.
std::vector<double> fuse_layers(std::span<const double> layer1, std::span<const double> layer2,
                                double epsilon);

// Highest score; ties go to the lexicographically smallest user id.
UserIndex argmax_user(std::span<const double> scores, std::span<const std::string> user_ids);
// All users by descending score with the same tie rule.
std::vector<UserIndex> rank_users(std::span<const double> scores,
                                  std::span<const std::string> user_ids);

// Additive per-sample log scores (samples x users) for the mode: layer 1
// alone, or the two-layer log-sum (also used by `full`).
Matrix sample_log_scores(const HierarchicalModel& model, const Matrix& samples, LayerMode mode);

struct Identification {
  std::vector<UserIndex> ranking;  // final identity first
  std::vector<double> aggregate;   // summed per-sample scores, per user
  UserIndex initial = 0;
  UserIndex final_identity = 0;
  std::optional<std::size_t> refined_by;  // component index when layer 3 ran
};

// Final decision from an aggregate score row: the initial identity is its
// argmax; in `full` mode a component member is re-scored by that
// component's layer-3 model over the same samples.
Identification decide(const HierarchicalModel& model, std::vector<double> aggregate,
                      const Matrix& samples, LayerMode mode);

Identification identify(const HierarchicalModel& model, const Matrix& samples,
                        LayerMode mode = LayerMode::full);

// For every misidentified presentation (two-layer aggregate), edges from the
// true user to the top `similar_users` other users by fused score.
ConfusionGraph build_confusion_graph(const HierarchicalModel& model,
                                     std::span<const Presentation> clustering);

// Seeded bisection of components larger than max_size.
UserGroups split_oversized(const UserGroups& components, std::size_t max_size, std::uint64_t seed);

HierarchicalModel train_hierarchy(const TrainingSet& training,
                                  std::span<const Presentation> clustering,
                                  const HierarchyConfig& config, const ClassifierTrainer& trainer);

// Layers 1-2 only.
HierarchicalModel train_layers(const TrainingSet& training, const HierarchyConfig& config,
                               const ClassifierTrainer& trainer);
void rebuild_layer3(HierarchicalModel& model, const TrainingSet& training,
                    std::span<const Presentation> clustering, const ClassifierTrainer& trainer);

struct RetrainedModel {
  int layer_index;
  std::size_t group;
  bool operator==(const RetrainedModel&) const = default;
};

// Appends the user to the smallest group of each layer (lowest index on ties)
// and retrains exactly those two models. `training` gains the new user.
std::vector<RetrainedModel> add_user(HierarchicalModel& model, TrainingSet& training,
                                     const std::string& user_id, const Matrix& samples,
                                     const ClassifierTrainer& trainer);

// Model directory: "manifest.txt" plus one file per model, each stamped with
// its SHA-256 in the manifest.
void save_hierarchy(const HierarchicalModel& model, const std::string& directory);
HierarchicalModel load_hierarchy(const std::string& directory);

std::string model_file_name(int layer_index, std::size_t group);

}  // namespace motionid
