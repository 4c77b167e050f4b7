#include "motionid/pipeline.hpp"

#include <algorithm>
#include <map>

#include "motionid/parallel.hpp"
#include "motionid/rng.hpp"

namespace motionid {

namespace {

std::vector<SessionReplay> replays_of(const std::vector<Replay>& replays,
                                      const std::map<std::string, std::string>& session_of,
                                      const std::vector<std::string>& replay_ids,
                                      const std::vector<std::string>& sessions) {
  std::vector<SessionReplay> out;
  for (std::size_t i = 0; i < replays.size(); ++i) {
    const std::string& session = session_of.at(replay_ids[i]);
    if (std::find(sessions.begin(), sessions.end(), session) != sessions.end()) {
      out.push_back({&replays[i], session});
    }
  }
  return out;
}

// Every featurizable sample of the given sessions, at most `cap` per session
// (0 = no cap), in session then event order.
std::vector<FeatureVector> featurize_sessions(const std::vector<SessionReplay>& replays,
                                              const DatasetOptions& options) {
  std::vector<FeatureVector> all = featurize_all(replays, options.variant, options.window);
  if (options.eval_samples_per_session == 0) return all;
  std::vector<FeatureVector> out;
  std::map<std::string, std::size_t> taken;
  for (auto& v : all) {
    if (taken[v.session_id]++ < options.eval_samples_per_session) out.push_back(std::move(v));
  }
  return out;
}

template <typename Fn>
void for_usable(const Dataset& dataset, Fn&& fn) {
  UserIndex index = 0;
  for (const UserData& user : dataset.users) {
    if (!user.usable) continue;
    fn(index++, user);
  }
}

}  // namespace

UserData build_user(std::vector<Replay> replays, const DatasetOptions& options) {
  options.window.validate();
  if (replays.empty()) throw Error("pipeline", "user has no replays");
  UserData user;
  user.user_id = replays.front().metadata.user_id;
  std::stable_sort(replays.begin(), replays.end(),
                   [](const Replay& a, const Replay& b) { return a.start_time() < b.start_time(); });

  std::vector<std::string> replay_ids;
  std::vector<ReplayRef> refs;
  for (std::size_t i = 0; i < replays.size(); ++i) {
    const Replay& r = replays[i];
    if (r.metadata.user_id != user.user_id) {
      throw Error("pipeline", "replays of " + user.user_id + " and " + r.metadata.user_id + " mixed");
    }
    std::string id = r.replay_id().empty() ? user.user_id + ":r" + std::to_string(i) : r.replay_id();
    replay_ids.push_back(id);
    refs.push_back({id, user.user_id, r.start_time(), r.end_time()});
  }
  user.sessions = sessionize(refs);
  std::map<std::string, std::string> session_of;
  for (const Session& s : user.sessions) {
    for (const auto& id : s.replay_ids) session_of[id] = s.session_id;
  }
  user.splits = assign_splits(user.sessions, options.ratios, options.seed);

  const auto train_replays = replays_of(replays, session_of, replay_ids, user.splits[Split::train]);
  user.train = sample_training_events(train_replays, options.variant, options.window,
                                      options.train_samples_per_user,
                                      derive_seed(options.seed, hash_tag(user.user_id) ^ 0x7261696eull));
  if (options.test_from_training_sessions || user.splits.same_session_fallback) {
    user.test = featurize_sessions(train_replays, options);
  } else {
    user.test = featurize_sessions(replays_of(replays, session_of, replay_ids, user.splits[Split::test]), options);
  }
  user.cluster = featurize_sessions(replays_of(replays, session_of, replay_ids, user.splits[Split::cluster]), options);
  user.validate = featurize_sessions(replays_of(replays, session_of, replay_ids, user.splits[Split::validate]), options);

  const ReplayMetadata& meta = replays.front().metadata;
  user.attributes.headset = meta.headset;
  user.attributes.platform = meta.platform;
  user.attributes.country = meta.country;
  user.attributes.handedness = meta.handedness == Handedness::left ? "left" : "right";
  if (meta.self_height > 0.0) user.attributes.height = meta.self_height;
  user.attributes.replay_count = replays.size();
  user.usable = !user.train.empty();
  return user;
}

Dataset build_dataset(std::size_t user_count, const ReplaySource& source, const DatasetOptions& options) {
  Dataset dataset;
  dataset.variant = options.variant;
  dataset.users.resize(user_count);
  parallel_for(user_count, resolve_parallelism(options.parallelism),
               [&](std::size_t u) { dataset.users[u] = build_user(source(u), options); });
  std::map<std::string, std::size_t> seen;
  for (const UserData& user : dataset.users) {
    if (seen[user.user_id]++ > 0) throw Error("pipeline", "duplicate user id " + user.user_id);
  }
  return dataset;
}

void scale_dataset(Dataset& dataset) {
  if (dataset.scaled) throw Error("pipeline", "dataset is already scaled");
  Matrix pooled;
  for (const UserData& user : dataset.users) {
    if (!user.usable) continue;
    for (const FeatureVector& v : user.train) pooled.append_row(v.values);
  }
  if (pooled.empty()) throw Error("pipeline", "no training samples to fit the scaler");
  dataset.scaler = fit_scaler(pooled);
  for (UserData& user : dataset.users) {
    for (auto* list : {&user.train, &user.cluster, &user.validate, &user.test}) {
      for (FeatureVector& v : *list) transform_in_place(dataset.scaler, v.values);
    }
  }
  dataset.scaled = true;
}

Matrix to_matrix(std::span<const FeatureVector> samples) {
  if (samples.empty()) return {};
  Matrix m(samples.size(), samples.front().values.size());
  for (std::size_t r = 0; r < samples.size(); ++r) {
    if (samples[r].values.size() != m.cols()) throw Error("pipeline", "ragged feature vectors");
    std::copy(samples[r].values.begin(), samples[r].values.end(), m.row(r).begin());
  }
  return m;
}

TrainingSet make_training_set(const Dataset& dataset) {
  TrainingSet training;
  for_usable(dataset, [&](UserIndex, const UserData& user) {
    training.user_ids.push_back(user.user_id);
    training.samples.push_back(to_matrix(user.train));
  });
  return training;
}

std::vector<Presentation> clustering_presentations(const Dataset& dataset) {
  std::vector<Presentation> out;
  for_usable(dataset, [&](UserIndex index, const UserData& user) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<FeatureVector>> by_session;
    for (const FeatureVector& v : user.cluster) {
      if (!by_session.contains(v.session_id)) order.push_back(v.session_id);
      by_session[v.session_id].push_back(v);
    }
    for (const auto& session : order) out.push_back({index, session, to_matrix(by_session[session])});
  });
  return out;
}

std::vector<TestSet> make_test_sets(const Dataset& dataset) {
  std::vector<TestSet> out;
  for_usable(dataset, [&](UserIndex index, const UserData& user) {
    TestSet t;
    t.user = index;
    t.samples = to_matrix(user.test);
    for (const FeatureVector& v : user.test) t.session_ids.push_back(v.session_id);
    out.push_back(std::move(t));
  });
  return out;
}

std::set<std::string> test_session_ids(const Dataset& dataset) {
  std::set<std::string> ids;
  for_usable(dataset, [&](UserIndex, const UserData& user) {
    for (const auto& s : user.splits[Split::test]) ids.insert(s);
  });
  return ids;
}

std::vector<UserAttributes> user_attributes(const Dataset& dataset) {
  std::vector<UserAttributes> out;
  for_usable(dataset, [&](UserIndex, const UserData& user) { out.push_back(user.attributes); });
  return out;
}

std::size_t session_overlap(const Dataset& dataset) {
  std::size_t overlap = 0;
  for (const UserData& user : dataset.users) {
    std::map<std::string, int> owners;
    for (Split split : kSplits) {
      for (const auto& s : user.splits[split]) ++owners[s];
    }
    for (const auto& [session, count] : owners) overlap += static_cast<std::size_t>(count - 1);
    const auto& train = user.splits[Split::train];
    for (const FeatureVector& v : user.test) {
      if (std::find(train.begin(), train.end(), v.session_id) != train.end()) ++overlap;
    }
  }
  return overlap;
}

}  // namespace motionid
