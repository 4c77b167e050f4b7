#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "motionid/replay.hpp"

namespace motionid {

struct HeightBand {
  double low = 0.0, high = 0.0;  // meters, [low, high)
  double weight = 0.0;
};

// Population priors for synthetic users. Height band frequencies follow the
// observed participant distribution.
struct SynthPriors {
  std::vector<HeightBand> height_bands = default_height_bands();
  std::optional<double> fixed_height;
  // Every user gets the same motion style (only physiology differs).
  bool equalize_style = false;
  // Multiplies the spread of style parameters around their population mean.
  double style_spread = 1.0;

  static std::vector<HeightBand> default_height_bands();
  void validate() const;
};

struct UserProfile {
  std::string user_id;
  double height = 1.75;      // meters
  double arm_length = 0.65;  // meters
  double swing_amplitude = 0.35;  // meters, half the swing stroke
  double tempo_bias = 0.0;        // seconds early(-)/late(+)
  double lead_time = 0.25;        // seconds from wind-up to contact
  std::array<double, 3> jitter = {0.004, 0.004, 0.004};  // meters, per axis
  double wrist_flex = 0.6;        // radians of saber pitch through a swing
  double stance_x = 0.0, stance_z = 0.0;
  double head_pitch = 0.1;        // radians
  double sway = 0.02;             // meters
  double cut_bias_y = 0.0;        // meters
  double angle_bias = 0.0;        // degrees
  std::string headset, platform, controller, country;
  Handedness handedness = Handedness::right;
  std::uint64_t seed = 0;

  bool operator==(const UserProfile&) const = default;
};

UserProfile generate_user(std::uint64_t seed, std::size_t index, const SynthPriors& priors = {});

// One replay of one user. Notes sit on a fixed grid shared by every user and
// session; hands follow minimum-jerk swings through each cut point. Session
// offsets, per-note errors and per-frame jitter all scale with noise_scale.
Replay generate_replay(const UserProfile& profile, std::size_t session_index, std::size_t n_notes,
                       double fps, double noise_scale, std::size_t replay_index = 0);

struct CorpusSpec {
  std::size_t users = 50;
  std::size_t sessions_per_user = 6;
  std::size_t replays_per_session = 1;
  std::size_t notes_per_replay = 60;
  double fps = 60.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  SynthPriors priors;
};

// Within a session each replay starts 30 s after the previous one ends;
// sessions start a day apart.
std::vector<Replay> generate_user_replays(const UserProfile& profile, const CorpusSpec& spec);

// "user_id,height,arm_length,..." ground-truth lines.
void write_profile_manifest(std::span<const UserProfile> profiles, std::ostream& out);

}  // namespace motionid
