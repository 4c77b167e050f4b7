#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "motionid/evaluator.hpp"
#include "motionid/featurizer.hpp"
#include "motionid/hierarchy.hpp"
#include "motionid/preprocessor.hpp"
#include "motionid/replay.hpp"
#include "motionid/sessionizer.hpp"

namespace motionid {

struct DatasetOptions {
  Variant variant = Variant::full232;
  WindowSpec window;
  SplitRatios ratios;
  std::size_t train_samples_per_user = 150;
  // Cap on samples kept per non-training session; 0 keeps all.
  std::size_t eval_samples_per_session = 0;
  std::uint64_t seed = 0;
  // Leak detector: test samples come from the training sessions instead of
  // the held-out test sessions.
  bool test_from_training_sessions = false;
  std::size_t parallelism = 0;  // users featurized concurrently; 0 = all cores
};

struct UserData {
  std::string user_id;
  std::vector<Session> sessions;
  SplitAssignment splits;
  std::vector<FeatureVector> train, cluster, validate, test;
  UserAttributes attributes;
  bool usable = true;
};

struct Dataset {
  Variant variant = Variant::full232;
  std::vector<UserData> users;
  Scaler scaler;
  bool scaled = false;
};

// Replays of one user; called once per user index.
using ReplaySource = std::function<std::vector<Replay>(std::size_t user)>;

// Sessionizes, splits, samples and featurizes every user. Features are raw
// (unscaled); call scale_dataset next.
Dataset build_dataset(std::size_t user_count, const ReplaySource& source,
                      const DatasetOptions& options);
UserData build_user(std::vector<Replay> replays, const DatasetOptions& options);

// Fits the scaler on the pooled training samples and applies it everywhere.
void scale_dataset(Dataset& dataset);

// Users without training samples are skipped by every builder below, so
// user indices agree across them.
TrainingSet make_training_set(const Dataset& dataset);
// One presentation per clustering session.
std::vector<Presentation> clustering_presentations(const Dataset& dataset);
// Test samples per user in session order.
std::vector<TestSet> make_test_sets(const Dataset& dataset);
std::set<std::string> test_session_ids(const Dataset& dataset);
std::vector<UserAttributes> user_attributes(const Dataset& dataset);

// Sessions shared between a user's splits plus test samples drawn from a
// training session, summed over users. Zero for a disjoint-session run.
std::size_t session_overlap(const Dataset& dataset);

Matrix to_matrix(std::span<const FeatureVector> samples);

}  // namespace motionid
