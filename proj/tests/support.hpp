#pragma once

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "motionid/replay.hpp"
#include "motionid/rng.hpp"

namespace testing {

using namespace motionid;

// The volatile store pins the rounding; gcc 11's SLP vectorizer at -O3 has
// been seen folding the float round trip away.
inline double f32(double v) {
  volatile float rounded = static_cast<float>(v);
  return rounded;
}

// Random unit quaternion, f32-representable, w >= 0.
inline void random_rotation(Rng& rng, Pose& p) {
  double q[4], n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& c : q) {
      c = rng.normal();
      n2 += c * c;
    }
  } while (n2 < 1e-6);
  const double s = (q[3] < 0.0 ? -1.0 : 1.0) / std::sqrt(n2);
  p.rot_i = f32(q[0] * s);
  p.rot_j = f32(q[1] * s);
  p.rot_k = f32(q[2] * s);
  p.rot_w = f32(q[3] * s);
}

inline Pose random_pose(Rng& rng, double y) {
  Pose p;
  p.pos_x = f32(rng.uniform(-0.8, 0.8));
  p.pos_y = f32(y + rng.uniform(-0.3, 0.3));
  p.pos_z = f32(rng.uniform(-0.6, 0.6));
  random_rotation(rng, p);
  return p;
}

// A valid replay whose values survive the container bit-exactly.
inline Replay random_replay(Rng& rng, std::size_t frames, std::size_t events,
                            const std::string& user = "user") {
  Replay r;
  r.metadata.user_id = user;
  r.metadata.platform = rng.uniform() < 0.5 ? "steam" : "oculus";
  r.metadata.runtime = "OpenXR";
  r.metadata.headset = "Quest " + std::to_string(rng.below(3) + 1);
  r.metadata.controller = "Touch";
  r.metadata.self_height = rng.uniform(1.4, 2.0);
  r.metadata.handedness = rng.uniform() < 0.2 ? Handedness::left : Handedness::right;
  r.metadata.country = rng.uniform() < 0.5 ? "DE" : "";
  r.metadata.recorded_at = 1600000000 + static_cast<std::int64_t>(rng.below(100000000));
  r.metadata.fps_nominal = 72.0;
  r.metadata.extra["replay_id"] = user + "-" + std::to_string(rng.below(1000000));
  if (rng.uniform() < 0.5) r.metadata.extra["note"] = "k=v, with \"quotes\"\n";

  double t = rng.uniform(0.0, 0.01);
  for (std::size_t i = 0; i < frames; ++i) {
    Frame f;
    f.time = t;
    f.head = random_pose(rng, 1.7);
    f.left_hand = random_pose(rng, 1.1);
    f.right_hand = random_pose(rng, 1.1);
    r.frames.push_back(f);
    t += rng.uniform(1.0 / 100.0, 1.0 / 50.0);
  }
  if (frames == 0) return r;
  const double first = r.frames.front().time, last = r.frames.back().time;
  std::vector<double> times;
  for (std::size_t i = 0; i < events; ++i) times.push_back(rng.uniform(first, last));
  std::sort(times.begin(), times.end());
  for (double time : times) {
    NoteEvent e;
    e.event_time = time;
    e.line_index = static_cast<std::uint8_t>(rng.below(4));
    e.line_layer = static_cast<std::uint8_t>(rng.below(3));
    e.color = rng.uniform() < 0.5 ? Saber::left : Saber::right;
    e.cut_direction = static_cast<std::uint8_t>(rng.below(9));
    e.correct_saber = rng.uniform() < 0.95;
    std::array<double, NoteEvent::kKinematicValues> k{};
    for (double& v : k) v = f32(rng.normal(0.0, 2.0));
    e.set_kinematics(k);
    r.events.push_back(e);
  }
  return r;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("motionid_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Little-endian writer for hand-built BSOR fixtures.
class BsorWriter {
 public:
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t v) { bytes.push_back(v); }
  void i32(std::int32_t v) { put(&v, 4); }
  void u32(std::uint32_t v) { put(&v, 4); }
  void f32(float v) { put(&v, 4); }
  void str(const std::string& s) {
    i32(static_cast<std::int32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
  void pose(float x, float y, float z, float i, float j, float k, float w) {
    for (float v : {x, y, z, i, j, k, w}) f32(v);
  }

 private:
  void put(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
};

}  // namespace testing
