#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "motionid/error.hpp"

namespace motionid {

// Position in meters, orientation as a unit quaternion stored (i, j, k, w).
struct Pose {
  double pos_x = 0.0, pos_y = 0.0, pos_z = 0.0;
  double rot_i = 0.0, rot_j = 0.0, rot_k = 0.0, rot_w = 1.0;

  static constexpr std::size_t kComponents = 7;
  std::array<double, kComponents> components() const {
    return {pos_x, pos_y, pos_z, rot_i, rot_j, rot_k, rot_w};
  }

  bool operator==(const Pose&) const = default;
};

enum class TrackedObject : std::uint8_t { head = 0, left_hand = 1, right_hand = 2 };
inline constexpr std::array<TrackedObject, 3> kTrackedObjects = {
    TrackedObject::head, TrackedObject::left_hand, TrackedObject::right_hand};

struct Frame {
  double time = 0.0;  // seconds since replay start
  Pose head, left_hand, right_hand;

  const Pose& pose(TrackedObject object) const {
    switch (object) {
      case TrackedObject::head: return head;
      case TrackedObject::left_hand: return left_hand;
      default: return right_hand;
    }
  }
  Pose& pose(TrackedObject object) {
    return const_cast<Pose&>(static_cast<const Frame&>(*this).pose(object));
  }

  bool operator==(const Frame&) const = default;
};

enum class Saber : std::uint8_t { left = 0, right = 1 };

// One block-cut stimulus and the response to it. Field order here is the
// order used by both the container and the context feature vector.
struct NoteEvent {
  double event_time = 0.0;
  std::uint8_t line_index = 0;     // 0-3
  std::uint8_t line_layer = 0;     // 0-2
  Saber color = Saber::left;
  std::uint8_t cut_direction = 0;  // 0-8
  bool correct_saber = true;
  double cut_angle_deviation = 0.0;  // degrees
  double saber_speed = 0.0;          // m/s
  double saber_dir_x = 0.0, saber_dir_y = 0.0, saber_dir_z = 0.0;
  double cut_point_x = 0.0, cut_point_y = 0.0, cut_point_z = 0.0;
  double cut_normal_x = 0.0, cut_normal_y = 0.0, cut_normal_z = 0.0;
  double distance_to_center = 0.0;  // meters
  double time_deviation = 0.0;      // seconds
  double before_cut_rating = 0.0, after_cut_rating = 0.0, accuracy_score = 0.0;

  static constexpr std::size_t kContextValues = 22;
  static constexpr std::size_t kKinematicValues = 16;

  std::array<double, kKinematicValues> kinematics() const {
    return {cut_angle_deviation, saber_speed,    saber_dir_x,        saber_dir_y,
            saber_dir_z,         cut_point_x,    cut_point_y,        cut_point_z,
            cut_normal_x,        cut_normal_y,   cut_normal_z,       distance_to_center,
            time_deviation,      before_cut_rating, after_cut_rating, accuracy_score};
  }
  void set_kinematics(const std::array<double, kKinematicValues>& values);

  // Missed notes are stored with non-finite kinematics and never featurized.
  bool has_cut() const;

  bool operator==(const NoteEvent&) const = default;
};

enum class Handedness : std::uint8_t { right = 0, left = 1 };

struct ReplayMetadata {
  std::string user_id;
  std::string platform, runtime, headset, controller;
  double self_height = 0.0;  // meters, 0 when unknown
  Handedness handedness = Handedness::right;
  std::string country;       // ISO code, empty when unknown
  std::int64_t recorded_at = 0;  // UTC, unix seconds
  double fps_nominal = 0.0;
  // Keys the canonical model does not name (e.g. "replay_id"). Preserved on
  // round trip.
  std::map<std::string, std::string> extra;

  bool operator==(const ReplayMetadata&) const = default;
};

struct Replay {
  ReplayMetadata metadata;
  std::vector<Frame> frames;
  std::vector<NoteEvent> events;

  double duration() const { return frames.empty() ? 0.0 : frames.back().time; }
  double start_time() const { return static_cast<double>(metadata.recorded_at); }
  double end_time() const { return start_time() + duration(); }
  const std::string& replay_id() const;

  // Median inter-frame interval outside [1/144 s, 1/30 s].
  bool low_quality() const;

  bool operator==(const Replay&) const = default;
};

class ReplayError : public Error {
 public:
  explicit ReplayError(const std::string& message) : Error("replay_store", message) {}
};

// Throws ReplayError naming the first violated invariant.
void validate(const Replay& replay);

// Normalizes the quaternion (skipped when already unit to double precision)
// and flips its sign so rot_w >= 0. Idempotent.
void canonicalize(Pose& pose);
void canonicalize(Replay& replay);

}  // namespace motionid
