#include "motionid/sessionizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>

#include "motionid/rng.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

namespace {

// Tie-break and minimum-fill order.
constexpr std::array<Split, 4> kPriority = {Split::train, Split::test, Split::validate,
                                            Split::cluster};

std::string session_name(const std::string& user_id, std::size_t index) {
  char suffix[16];
  std::snprintf(suffix, sizeof(suffix), ":s%03zu", index);
  return user_id + suffix;
}

}  // namespace

const char* split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::cluster: return "cluster";
    case Split::validate: return "validate";
    default: return "test";
  }
}

Split parse_split(std::string_view name) {
  for (Split split : kSplits) {
    if (name == split_name(split)) return split;
  }
  throw SessionError("unknown split '" + std::string(name) + "'");
}

double SplitRatios::of(Split split) const {
  switch (split) {
    case Split::train: return train;
    case Split::cluster: return cluster;
    case Split::validate: return validate;
    default: return test;
  }
}

Split SplitAssignment::split_of(const std::string& session_id) const {
  for (Split split : kSplits) {
    const auto& set = (*this)[split];
    if (std::find(set.begin(), set.end(), session_id) != set.end()) return split;
  }
  throw SessionError("session " + session_id + " is not assigned to a split");
}

std::vector<Session> sessionize(std::span<const ReplayRef> replays, double max_gap) {
  std::vector<Session> sessions;
  for (std::size_t i = 0; i < replays.size(); ++i) {
    const ReplayRef& replay = replays[i];
    if (replay.user_id != replays.front().user_id) {
      throw SessionError("mixed user ids: " + replays.front().user_id + " and " + replay.user_id);
    }
    if (i > 0 && replay.start_time < replays[i - 1].start_time) {
      throw SessionError("replays are not sorted by start time");
    }
    const bool continues =
        !sessions.empty() && replay.start_time - replays[i - 1].end_time <= max_gap;
    if (!continues) {
      Session session;
      session.user_id = replay.user_id;
      session.session_id = session_name(replay.user_id, sessions.size());
      session.start_time = replay.start_time;
      session.end_time = replay.end_time;
      sessions.push_back(std::move(session));
    }
    Session& current = sessions.back();
    current.replay_ids.push_back(replay.replay_id);
    current.end_time = std::max(current.end_time, replay.end_time);
  }
  return sessions;
}

std::array<std::size_t, 4> split_counts(std::size_t sessions, const SplitRatios& ratios) {
  std::array<std::size_t, 4> counts{};
  if (sessions == 0) return counts;
  const double total = ratios.train + ratios.cluster + ratios.validate + ratios.test;
  if (!(total > 0.0)) throw SessionError("split ratios must have a positive sum");

  if (sessions < 4) {
    for (std::size_t i = 0; i < sessions; ++i) {
      counts[static_cast<std::size_t>(kPriority[i])] = 1;
    }
    return counts;
  }

  std::array<double, 4> remainders{};
  std::size_t assigned = 0;
  for (Split split : kSplits) {
    const double quota = static_cast<double>(sessions) * ratios.of(split) / total;
    const auto whole = static_cast<std::size_t>(std::floor(quota + 1e-9));
    counts[static_cast<std::size_t>(split)] = whole;
    remainders[static_cast<std::size_t>(split)] = std::max(0.0, quota - static_cast<double>(whole));
    assigned += whole;
  }
  // Largest remainder first; equal remainders resolved by priority.
  std::array<Split, 4> order = kPriority;
  std::stable_sort(order.begin(), order.end(), [&](Split a, Split b) {
    return remainders[static_cast<std::size_t>(a)] > remainders[static_cast<std::size_t>(b)];
  });
  for (std::size_t i = 0; assigned < sessions; ++i, ++assigned) {
    ++counts[static_cast<std::size_t>(order[i % 4])];
  }
  // Every set gets at least one session, taken from the largest set.
  for (Split split : kPriority) {
    auto& count = counts[static_cast<std::size_t>(split)];
    if (count > 0) continue;
    std::size_t donor = 0;
    for (Split candidate : kPriority) {
      if (counts[static_cast<std::size_t>(candidate)] > counts[donor]) {
        donor = static_cast<std::size_t>(candidate);
      }
    }
    --counts[donor];
    count = 1;
  }
  return counts;
}

SplitAssignment assign_splits(std::span<const Session> sessions, const SplitRatios& ratios,
                              std::uint64_t seed) {
  if (sessions.empty()) throw SessionError("no sessions to assign");
  SplitAssignment assignment;
  assignment.user_id = sessions.front().user_id;
  const auto counts = split_counts(sessions.size(), ratios);

  std::vector<std::size_t> order(sessions.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, hash_tag(assignment.user_id)));
  rng.shuffle(order);

  std::size_t next = 0;
  for (Split split : kSplits) {
    std::vector<std::size_t> picked(order.begin() + static_cast<std::ptrdiff_t>(next),
                                    order.begin() + static_cast<std::ptrdiff_t>(
                                                        next + counts[static_cast<std::size_t>(split)]));
    next += counts[static_cast<std::size_t>(split)];
    std::sort(picked.begin(), picked.end());
    for (std::size_t index : picked) assignment[split].push_back(sessions[index].session_id);
  }
  if (sessions.size() < 2) {
    assignment.same_session_fallback = true;
    std::fprintf(stderr,
                 "sessionizer: WARNING user %s has a single session; testing will reuse the "
                 "training session\n",
                 assignment.user_id.c_str());
  }
  return assignment;
}

void write_split_manifest(std::span<const SplitRecord> records, std::ostream& out) {
  for (const SplitRecord& record : records) {
    out << record.user_id << ',' << record.session_id << ',' << split_name(record.split) << '\n';
  }
}

std::vector<SplitRecord> read_split_manifest(std::istream& in) {
  std::vector<SplitRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 3) throw SessionError("malformed split record: " + line);
    records.push_back({std::string(fields[0]), std::string(fields[1]), parse_split(text::trim(fields[2]))});
  }
  return records;
}

}  // namespace motionid
