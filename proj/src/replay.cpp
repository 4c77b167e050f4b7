#include "motionid/replay.hpp"

#include <algorithm>
#include <cmath>

namespace motionid {

namespace {

constexpr double kUnitTolerance = 1e-14;

bool finite_pose(const Pose& pose) {
  const auto c = pose.components();
  return std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
}

double quaternion_norm2(const Pose& pose) {
  return pose.rot_i * pose.rot_i + pose.rot_j * pose.rot_j + pose.rot_k * pose.rot_k +
         pose.rot_w * pose.rot_w;
}

}  // namespace

void NoteEvent::set_kinematics(const std::array<double, kKinematicValues>& v) {
  cut_angle_deviation = v[0];
  saber_speed = v[1];
  saber_dir_x = v[2];
  saber_dir_y = v[3];
  saber_dir_z = v[4];
  cut_point_x = v[5];
  cut_point_y = v[6];
  cut_point_z = v[7];
  cut_normal_x = v[8];
  cut_normal_y = v[9];
  cut_normal_z = v[10];
  distance_to_center = v[11];
  time_deviation = v[12];
  before_cut_rating = v[13];
  after_cut_rating = v[14];
  accuracy_score = v[15];
}

bool NoteEvent::has_cut() const {
  const auto values = kinematics();
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

const std::string& Replay::replay_id() const {
  static const std::string kEmpty;
  const auto it = metadata.extra.find("replay_id");
  return it == metadata.extra.end() ? kEmpty : it->second;
}

bool Replay::low_quality() const {
  if (frames.size() < 2) return true;
  std::vector<double> intervals;
  intervals.reserve(frames.size() - 1);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    intervals.push_back(frames[i].time - frames[i - 1].time);
  }
  const auto mid = intervals.begin() + static_cast<std::ptrdiff_t>(intervals.size() / 2);
  std::nth_element(intervals.begin(), mid, intervals.end());
  double median = *mid;
  if (intervals.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(intervals.begin(), mid));
  }
  return median < 1.0 / 144.0 || median > 1.0 / 30.0;
}

void validate(const Replay& replay) {
  if (replay.metadata.user_id.empty()) throw ReplayError("user_id is empty");
  if (replay.frames.empty()) throw ReplayError("replay has no frames");
  for (std::size_t i = 0; i < replay.frames.size(); ++i) {
    const Frame& frame = replay.frames[i];
    if (!std::isfinite(frame.time)) throw ReplayError("frame time is not finite");
    if (i > 0 && !(frame.time > replay.frames[i - 1].time)) {
      throw ReplayError("frames not monotonic");
    }
    for (TrackedObject object : kTrackedObjects) {
      const Pose& pose = frame.pose(object);
      if (!finite_pose(pose)) throw ReplayError("pose component is not finite");
      if (!(quaternion_norm2(pose) > 0.0)) throw ReplayError("zero quaternion");
    }
  }
  const double first = replay.frames.front().time;
  const double last = replay.frames.back().time;
  for (std::size_t i = 0; i < replay.events.size(); ++i) {
    const NoteEvent& event = replay.events[i];
    if (!std::isfinite(event.event_time)) throw ReplayError("event time is not finite");
    if (i > 0 && event.event_time < replay.events[i - 1].event_time) {
      throw ReplayError("events not sorted");
    }
    if (event.event_time < first || event.event_time > last) {
      throw ReplayError("event outside the frame time range");
    }
    if (event.line_index > 3 || event.line_layer > 2 || event.cut_direction > 8 ||
        static_cast<std::uint8_t>(event.color) > 1) {
      throw ReplayError("event field out of range");
    }
  }
}

void canonicalize(Pose& pose) {
  const double norm2 = quaternion_norm2(pose);
  if (std::abs(norm2 - 1.0) > kUnitTolerance) {
    const double norm = std::sqrt(norm2);
    pose.rot_i /= norm;
    pose.rot_j /= norm;
    pose.rot_k /= norm;
    pose.rot_w /= norm;
  }
  if (pose.rot_w < 0.0) {
    pose.rot_i = -pose.rot_i;
    pose.rot_j = -pose.rot_j;
    pose.rot_k = -pose.rot_k;
    pose.rot_w = -pose.rot_w;
  }
}

void canonicalize(Replay& replay) {
  for (Frame& frame : replay.frames) {
    for (TrackedObject object : kTrackedObjects) canonicalize(frame.pose(object));
  }
}

}  // namespace motionid
