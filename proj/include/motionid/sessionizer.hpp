#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "motionid/error.hpp"

namespace motionid {

inline constexpr double kSessionGapSeconds = 600.0;

// What the sessionizer needs to know about a replay.
struct ReplayRef {
  std::string replay_id;
  std::string user_id;
  double start_time = 0.0;  // unix seconds
  double end_time = 0.0;
};

struct Session {
  std::string session_id;
  std::string user_id;
  std::vector<std::string> replay_ids;
  double start_time = 0.0;
  double end_time = 0.0;

  bool operator==(const Session&) const = default;
};

enum class Split : std::uint8_t { train = 0, cluster = 1, validate = 2, test = 3 };
inline constexpr std::array<Split, 4> kSplits = {Split::train, Split::cluster, Split::validate,
                                                 Split::test};
const char* split_name(Split split);
Split parse_split(std::string_view name);

struct SplitRatios {
  double train = 0.7;
  double cluster = 0.1;
  double validate = 0.1;
  double test = 0.1;

  double of(Split split) const;
};

struct SplitAssignment {
  std::string user_id;
  std::array<std::vector<std::string>, 4> sets;  // indexed by Split
  // Fewer than two sessions: testing falls back to the training session.
  bool same_session_fallback = false;

  const std::vector<std::string>& operator[](Split split) const {
    return sets[static_cast<std::size_t>(split)];
  }
  std::vector<std::string>& operator[](Split split) {
    return sets[static_cast<std::size_t>(split)];
  }
  // The split holding session_id; throws if the session is unassigned.
  Split split_of(const std::string& session_id) const;
};

class SessionError : public Error {
 public:
  explicit SessionError(const std::string& message) : Error("sessionizer", message) {}
};

// Splits a user's time-ordered replays into maximal runs whose gaps (next
// start minus previous end) are at most max_gap seconds.
std::vector<Session> sessionize(std::span<const ReplayRef> replays,
                                double max_gap = kSessionGapSeconds);

// Session counts per split: largest-remainder rounding of the ratios, ties
// and minimums resolved in priority order train > test > validate > cluster.
std::array<std::size_t, 4> split_counts(std::size_t sessions, const SplitRatios& ratios);

SplitAssignment assign_splits(std::span<const Session> sessions, const SplitRatios& ratios,
                              std::uint64_t seed);

// "user_id,session_id,split" lines ordered by user then session start.
struct SplitRecord {
  std::string user_id;
  std::string session_id;
  Split split;
  bool operator==(const SplitRecord&) const = default;
};
void write_split_manifest(std::span<const SplitRecord> records, std::ostream& out);
std::vector<SplitRecord> read_split_manifest(std::istream& in);

}  // namespace motionid
