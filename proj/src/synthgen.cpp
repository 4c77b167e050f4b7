#include "motionid/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "motionid/rng.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

namespace {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};
Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double norm(Vec3 a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }
Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }

constexpr double kDegree = std::numbers::pi / 180.0;
constexpr double kFirstNote = 1.5;   // seconds
constexpr double kNoteSpacing = 0.5; // seconds; each hand cuts every other note
constexpr double kTail = 1.5;        // seconds after the last note
constexpr std::int64_t kEpoch = 1650000000;

struct Category {
  const char* name;
  double weight;
};

// Participant frequencies for headsets, countries and handedness.
constexpr Category kHeadsets[] = {
    {"Oculus Quest 2 (Standalone)", 25857}, {"Oculus Quest 2 (Quest Link)", 4124},
    {"Valve Index", 8820},                  {"Oculus Rift S", 4483},
    {"HTC Vive", 2408},                     {"Oculus Rift CV1", 2061},
    {"Pico Neo 3", 1595},                   {"Oculus Quest (Standalone)", 1453},
    {"Oculus Quest (Quest Link)", 313},     {"PICO 4", 905},
    {"HTC VIVE Pro", 728},                  {"HP Reverb G20", 644},
    {"HTC Vive Cosmos Elite", 395},         {"HTC VIVE Pro 2", 328},
    {"Samsung Windows Mixed Reality", 304}, {"HTC Vive Cosmos", 226},
};
constexpr Category kCountries[] = {
    {"US", 15142}, {"DE", 2404}, {"GB", 2350}, {"CN", 1964}, {"CA", 1563}, {"JP", 1337},
    {"AU", 988},   {"FR", 955},  {"NL", 767},  {"RU", 743},  {"PL", 650},  {"HK", 545},
    {"BR", 349},   {"CZ", 344},  {"FI", 335},  {"KR", 304},  {"NO", 297},  {"SE", 288},
    {"ES", 282},   {"AT", 277},  {"DK", 255},  {"SG", 241},  {"BE", 201},  {"IT", 188},
    {"NZ", 159},
};
constexpr double kLeftHanded = 0.043;

template <std::size_t N>
const char* draw(const Category (&table)[N], double u) {
  double total = 0.0;
  for (const auto& c : table) total += c.weight;
  double at = u * total;
  for (const auto& c : table) {
    if (at < c.weight) return c.name;
    at -= c.weight;
  }
  return table[N - 1].name;
}

struct DeviceInfo {
  const char* platform;
  const char* runtime;
  const char* controller;
};

DeviceInfo device_for(const std::string& headset) {
  const auto has = [&](const char* s) { return headset.find(s) != std::string::npos; };
  if (has("Standalone")) return {"Oculus", "Oculus", "Oculus Quest Controller"};
  if (has("Quest Link")) return {"Oculus PC", "Oculus", "Oculus Quest Controller"};
  if (has("Rift S")) return {"Oculus PC", "Oculus", "Oculus Rift S Controller"};
  if (has("Rift CV1")) return {"Oculus PC", "Oculus", "Oculus Rift CV1 Controller"};
  if (has("Index")) return {"SteamVR", "OpenVR", "Valve Knuckles Controller"};
  if (has("Pico") || has("PICO")) return {"SteamVR", "OpenVR", "Pico Neo 3 Controller"};
  if (has("VIVE Pro")) return {"SteamVR", "OpenVR", "HTC VIVE Pro Controller"};
  if (has("Vive") || has("VIVE")) return {"SteamVR", "OpenVR", "HTC Vive Controller"};
  return {"SteamVR", "OpenVR", "Windows Mixed Reality Controller"};
}

double min_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

// Extrinsic X-Y-Z rotation, i.e. R = Rz(yaw) Ry(pitch) Rx(roll).
void set_orientation(Pose& pose, double roll, double pitch, double yaw) {
  const double cr = std::cos(roll / 2), sr = std::sin(roll / 2);
  const double cp = std::cos(pitch / 2), sp = std::sin(pitch / 2);
  const double cy = std::cos(yaw / 2), sy = std::sin(yaw / 2);
  pose.rot_w = cy * cp * cr + sy * sp * sr;
  pose.rot_i = cy * cp * sr - sy * sp * cr;
  pose.rot_j = cy * sp * cr + sy * cp * sr;
  pose.rot_k = sy * cp * cr - cy * sp * sr;
  if (pose.rot_w < 0) {
    pose.rot_w = -pose.rot_w;
    pose.rot_i = -pose.rot_i;
    pose.rot_j = -pose.rot_j;
    pose.rot_k = -pose.rot_k;
  }
}

struct GridNote {
  double time;
  std::uint8_t line, layer, direction;
  Saber color;
};

GridNote grid_note(std::size_t n) {
  const std::uint64_t h = mix64(n + 0x5eedull);
  GridNote note;
  note.time = kFirstNote + kNoteSpacing * static_cast<double>(n);
  note.color = n % 2 == 0 ? Saber::left : Saber::right;
  note.line = static_cast<std::uint8_t>((note.color == Saber::left ? 0 : 2) + (h & 1));
  note.layer = static_cast<std::uint8_t>((h >> 1) % 3);
  note.direction = static_cast<std::uint8_t>((h >> 3) % 9);
  return note;
}

// Screen-plane unit vector of a cut direction; a dot note is cut downward.
std::pair<double, double> direction_vector(std::uint8_t direction) {
  constexpr double r = std::numbers::sqrt2 / 2;
  switch (direction) {
    case 0: return {0, 1};
    case 2: return {-1, 0};
    case 3: return {1, 0};
    case 4: return {-r, r};
    case 5: return {r, r};
    case 6: return {-r, -r};
    case 7: return {r, -r};
    default: return {0, -1};
  }
}

struct Keyframe {
  double time;
  Vec3 pos;
  double roll, pitch;
};

// Hand pose along a keyframe track: minimum-jerk between neighbors, held
// before the first and after the last.
struct Track {
  std::vector<Keyframe> keys;
  std::size_t cursor = 0;

  Keyframe at(double t) {
    if (t <= keys.front().time) return keys.front();
    if (t >= keys.back().time) return keys.back();
    while (keys[cursor + 1].time < t) ++cursor;
    const Keyframe& a = keys[cursor];
    const Keyframe& b = keys[cursor + 1];
    const double s = min_jerk((t - a.time) / (b.time - a.time));
    return {t, a.pos + s * (b.pos - a.pos), a.roll + s * (b.roll - a.roll), a.pitch + s * (b.pitch - a.pitch)};
  }
};

// Style of one session: the profile plus a drift shared by its replays.
struct SessionStyle {
  double amplitude, lead, tempo, flex, angle_bias;
  double stance_x, stance_z, cut_bias_y, head_pitch, posture;
  double sway_phase, bob_phase;
};

SessionStyle session_style(const UserProfile& p, std::size_t session_index, double ns) {
  ns *= 0.5;  // session drift stays small next to within-session variation
  Rng rng(derive_seed(p.seed, 0x5e5500ull + session_index));
  SessionStyle s;
  s.amplitude = p.swing_amplitude * std::max(0.5, 1.0 + 0.08 * ns * rng.normal());
  s.lead = std::clamp(p.lead_time + 0.015 * ns * rng.normal(), 0.1, 0.42);
  s.tempo = p.tempo_bias + 0.008 * ns * rng.normal();
  s.flex = p.wrist_flex + 0.06 * ns * rng.normal();
  s.angle_bias = p.angle_bias + 2.0 * ns * rng.normal();
  s.stance_x = p.stance_x + 0.03 * ns * rng.normal();
  s.stance_z = p.stance_z + 0.03 * ns * rng.normal();
  s.cut_bias_y = p.cut_bias_y + 0.02 * ns * rng.normal();
  s.head_pitch = p.head_pitch + 0.03 * ns * rng.normal();
  s.posture = 0.01 * ns * rng.normal();
  s.sway_phase = ns > 0 ? rng.uniform(0.0, 2 * std::numbers::pi) : 0.0;
  s.bob_phase = ns > 0 ? rng.uniform(0.0, 2 * std::numbers::pi) : 0.0;
  return s;
}

// Slow body wander within a replay: a few low-frequency sinusoids per axis,
// so windows of one session differ by more than frame jitter.
struct Wander {
  static constexpr std::size_t kTerms = 3;
  std::array<std::array<double, kTerms>, 6> amp{}, freq{}, phase{};

  Wander(Rng& rng, double position_scale, double angle_scale) {
    for (std::size_t axis = 0; axis < 6; ++axis) {
      const double scale = axis < 3 ? position_scale : angle_scale;
      for (std::size_t k = 0; k < kTerms; ++k) {
        amp[axis][k] = scale * rng.uniform(0.5, 1.0) / std::sqrt(static_cast<double>(kTerms));
        freq[axis][k] = rng.uniform(0.05, 0.4);
        phase[axis][k] = rng.uniform(0.0, 2 * std::numbers::pi);
      }
    }
  }

  double at(std::size_t axis, double t) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < kTerms; ++k) {
      sum += amp[axis][k] * std::sin(2 * std::numbers::pi * freq[axis][k] * t + phase[axis][k]);
    }
    return sum;
  }
};

}  // namespace

std::vector<HeightBand> SynthPriors::default_height_bands() {
  return {{1.35, 1.5, 0.088}, {1.5, 1.6, 0.085}, {1.6, 1.7, 0.311},
          {1.7, 1.8, 0.333},  {1.8, 1.9, 0.121}, {1.9, 2.05, 0.062}};
}

void SynthPriors::validate() const {
  if (height_bands.empty() && !fixed_height) throw Error("synthgen", "no height bands");
  double total = 0.0;
  for (const auto& b : height_bands) {
    if (!(b.low >= 1.2 && b.high <= 2.2 && b.low < b.high) || b.weight < 0.0) {
      throw Error("synthgen", "invalid height band");
    }
    total += b.weight;
  }
  if (!fixed_height && !(total > 0.0)) throw Error("synthgen", "height band weights sum to zero");
  if (fixed_height && !(*fixed_height >= 1.2 && *fixed_height <= 2.2)) {
    throw Error("synthgen", "fixed height outside [1.2, 2.2] m");
  }
  if (!(style_spread >= 0.0)) throw Error("synthgen", "style_spread must be non-negative");
}

UserProfile generate_user(std::uint64_t seed, std::size_t index, const SynthPriors& priors) {
  priors.validate();
  UserProfile p;
  p.seed = derive_seed(seed, index);
  char id[24];
  std::snprintf(id, sizeof id, "u%05zu", index);
  p.user_id = id;
  Rng rng(p.seed);

  // Every draw happens regardless of the priors, so toggling one prior
  // leaves the remaining attributes of a user unchanged.
  const double band_u = rng.uniform();
  const double within_u = rng.uniform();
  if (priors.fixed_height) {
    p.height = *priors.fixed_height;
  } else {
    double total = 0.0;
    for (const auto& b : priors.height_bands) total += b.weight;
    double at = band_u * total;
    const HeightBand* band = &priors.height_bands.back();
    for (const auto& b : priors.height_bands) {
      if (at < b.weight) {
        band = &b;
        break;
      }
      at -= b.weight;
    }
    p.height = band->low + within_u * (band->high - band->low);
  }

  const double spread = priors.equalize_style ? 0.0 : priors.style_spread;
  auto style = [&](double mean, double sd) { return mean + spread * sd * rng.normal(); };
  p.arm_length = 0.37 * p.height + style(0.0, 0.02);
  p.swing_amplitude = std::clamp(style(0.35, 0.06), 0.15, 0.6);
  p.tempo_bias = style(0.0, 0.025);
  p.lead_time = std::clamp(style(0.25, 0.035), 0.12, 0.4);
  for (double& j : p.jitter) j = std::max(0.0005, style(0.004, 0.0015));
  p.wrist_flex = std::clamp(style(0.6, 0.15), 0.1, 1.2);
  p.stance_x = style(0.0, 0.06);
  p.stance_z = style(0.0, 0.06);
  p.head_pitch = style(0.1, 0.1);
  p.sway = std::max(0.0, style(0.02, 0.01));
  p.cut_bias_y = style(0.0, 0.05);
  p.angle_bias = style(0.0, 6.0);

  p.headset = draw(kHeadsets, rng.uniform());
  const DeviceInfo device = device_for(p.headset);
  p.platform = device.platform;
  p.controller = device.controller;
  p.country = draw(kCountries, rng.uniform());
  p.handedness = rng.uniform() < kLeftHanded ? Handedness::left : Handedness::right;
  return p;
}

Replay generate_replay(const UserProfile& profile, std::size_t session_index, std::size_t n_notes, double fps,
                       double noise_scale, std::size_t replay_index) {
  if (n_notes < 1) throw Error("synthgen", "n_notes must be at least 1");
  if (!(fps >= 30.0 && fps <= 144.0)) throw Error("synthgen", "fps must be in [30, 144]");
  if (!(noise_scale >= 0.0)) throw Error("synthgen", "noise_scale must be non-negative");
  const SessionStyle style = session_style(profile, session_index, noise_scale);
  const double ns = noise_scale;
  Rng rng(derive_seed(profile.seed, 0x7e9000000ull + session_index * 1000003ull + replay_index));

  Replay replay;
  ReplayMetadata& meta = replay.metadata;
  meta.user_id = profile.user_id;
  meta.platform = profile.platform;
  meta.runtime = device_for(profile.headset).runtime;
  meta.headset = profile.headset;
  meta.controller = profile.controller;
  meta.self_height = profile.height;
  meta.handedness = profile.handedness;
  meta.country = profile.country;
  meta.fps_nominal = fps;
  const double duration = grid_note(n_notes - 1).time + kTail;
  meta.recorded_at = kEpoch + static_cast<std::int64_t>(session_index) * 86400 +
                     static_cast<std::int64_t>(replay_index) * (static_cast<std::int64_t>(std::ceil(duration)) + 30);
  char rid[64];
  std::snprintf(rid, sizeof rid, "%s:s%03zu:r%03zu", profile.user_id.c_str(), session_index, replay_index);
  meta.extra["replay_id"] = rid;

  // Swings: wind-up at contact - lead, contact at the cut point, follow
  // through at contact + lead.
  Track hands[2];
  const double height_lift = 0.15 * (profile.height - 1.75);
  for (std::size_t n = 0; n < n_notes; ++n) {
    const GridNote note = grid_note(n);
    const auto hand = static_cast<std::size_t>(note.color);
    const bool dominant = (note.color == Saber::right) == (profile.handedness == Handedness::right);
    const double contact = note.time + style.tempo + 0.025 * ns * rng.normal();
    const double lead = std::clamp(style.lead + 0.01 * ns * rng.normal(), 0.08, 0.45);
    const double amplitude = style.amplitude * (dominant ? 1.1 : 1.0) * std::max(0.3, 1.0 + 0.12 * ns * rng.normal());
    const double flex = style.flex * std::max(0.2, 1.0 + 0.25 * ns * rng.normal());
    const double angle_dev = style.angle_bias + 8.0 * ns * rng.normal();
    const Vec3 target{(note.line - 1.5) * 0.3, 0.7 + 0.35 * note.layer, 0.6};
    const Vec3 error{0.04 * ns * rng.normal(), 0.04 * ns * rng.normal(), 0.04 * ns * rng.normal()};
    const Vec3 cut = target + Vec3{style.stance_x, style.cut_bias_y + height_lift, style.stance_z} + error;

    const auto [dx0, dy0] = direction_vector(note.direction);
    const double c = std::cos(angle_dev * kDegree), s = std::sin(angle_dev * kDegree);
    const Vec3 dir{dx0 * c - dy0 * s, dx0 * s + dy0 * c, 0.0};
    const Vec3 stroke = amplitude * dir + Vec3{0.0, 0.0, 0.1};
    const double roll = std::atan2(dir.y, dir.x);
    auto& keys = hands[hand].keys;
    double windup_time = contact - lead;
    if (!keys.empty()) windup_time = std::max(windup_time, keys.back().time + 0.05);
    const double follow_time = std::max(contact + lead, windup_time + 0.1);
    keys.push_back({windup_time, cut - stroke, roll, -flex});
    keys.push_back({follow_time, cut + stroke, roll, flex});

    NoteEvent event;
    event.event_time = note.time;
    event.line_index = note.line;
    event.line_layer = note.layer;
    event.color = note.color;
    event.cut_direction = note.direction;
    event.correct_saber = true;
    event.cut_angle_deviation = angle_dev;
    // Minimum-jerk peak speed: 1.875 x stroke length / swing duration.
    const Vec3 full_stroke = 2.0 * stroke;
    const double speed = 1.875 * norm(full_stroke) / (follow_time - windup_time);
    const Vec3 unit = (1.0 / norm(full_stroke)) * full_stroke;
    event.saber_speed = speed;
    event.saber_dir_x = unit.x;
    event.saber_dir_y = unit.y;
    event.saber_dir_z = unit.z;
    event.cut_point_x = cut.x;
    event.cut_point_y = cut.y;
    event.cut_point_z = cut.z;
    Vec3 normal = cross(unit, Vec3{0.0, 0.0, 1.0});
    normal = (1.0 / norm(normal)) * normal;
    event.cut_normal_x = normal.x;
    event.cut_normal_y = normal.y;
    event.cut_normal_z = normal.z;
    event.distance_to_center = std::hypot(cut.x - target.x, cut.y - target.y);
    event.time_deviation = contact - note.time;
    const double arc = flex / kDegree + 100.0 * amplitude;
    event.before_cut_rating = std::min(1.0, arc / 100.0);
    event.after_cut_rating = std::min(1.0, arc / 60.0);
    event.accuracy_score = 1.0 - std::min(1.0, event.distance_to_center / 0.3);
    replay.events.push_back(event);
  }

  const Wander wander(rng, 0.12 * ns, 0.2 * ns);
  const auto frame_count = static_cast<std::size_t>(std::floor(duration * fps)) + 1;
  replay.frames.reserve(frame_count);
  const double two_pi = 2 * std::numbers::pi;
  for (std::size_t k = 0; k < frame_count; ++k) {
    Frame frame;
    frame.time = static_cast<double>(k) / fps;
    const double t = frame.time;

    Pose& head = frame.head;
    head.pos_x = style.stance_x + profile.sway * std::sin(two_pi * 0.25 * t + style.sway_phase);
    head.pos_y = profile.height - 0.11 + style.posture + 0.01 * std::sin(two_pi * t + style.bob_phase);
    head.pos_z = style.stance_z;
    const Vec3 body{wander.at(0, t), wander.at(1, t), wander.at(2, t)};
    head.pos_x += body.x;
    head.pos_y += body.y;
    head.pos_z += body.z;
    head.pos_x += 0.5 * profile.jitter[0] * ns * rng.normal();
    head.pos_y += 0.5 * profile.jitter[1] * ns * rng.normal();
    head.pos_z += 0.5 * profile.jitter[2] * ns * rng.normal();
    set_orientation(head, style.head_pitch + wander.at(3, t) + 0.005 * ns * rng.normal(),
                    0.05 * std::sin(two_pi * 0.25 * t) + wander.at(4, t) + 0.005 * ns * rng.normal(),
                    wander.at(5, t));

    for (std::size_t h = 0; h < 2; ++h) {
      const Keyframe key = hands[h].at(t);
      Pose& pose = h == 0 ? frame.left_hand : frame.right_hand;
      pose.pos_x = key.pos.x + 0.7 * body.x + profile.jitter[0] * ns * rng.normal();
      pose.pos_y = key.pos.y + 0.7 * body.y + profile.jitter[1] * ns * rng.normal();
      pose.pos_z = key.pos.z + 0.7 * body.z + profile.jitter[2] * ns * rng.normal();
      set_orientation(pose, key.pitch + 0.01 * ns * rng.normal(), 0.01 * ns * rng.normal(), key.roll);
    }
    replay.frames.push_back(frame);
  }
  return replay;
}

std::vector<Replay> generate_user_replays(const UserProfile& profile, const CorpusSpec& spec) {
  std::vector<Replay> replays;
  for (std::size_t s = 0; s < spec.sessions_per_user; ++s) {
    for (std::size_t r = 0; r < spec.replays_per_session; ++r) {
      replays.push_back(generate_replay(profile, s, spec.notes_per_replay, spec.fps, spec.noise_scale, r));
    }
  }
  return replays;
}

void write_profile_manifest(std::span<const UserProfile> profiles, std::ostream& out) {
  using text::format_exact;
  out << "user_id,height,arm_length,swing_amplitude,tempo_bias,lead_time,jitter_x,jitter_y,jitter_z,"
         "wrist_flex,stance_x,stance_z,head_pitch,sway,cut_bias_y,angle_bias,headset,platform,controller,"
         "country,handedness,seed\n";
  for (const UserProfile& p : profiles) {
    out << p.user_id << ',' << format_exact(p.height) << ',' << format_exact(p.arm_length) << ','
        << format_exact(p.swing_amplitude) << ',' << format_exact(p.tempo_bias) << ','
        << format_exact(p.lead_time) << ',' << format_exact(p.jitter[0]) << ',' << format_exact(p.jitter[1])
        << ',' << format_exact(p.jitter[2]) << ',' << format_exact(p.wrist_flex) << ','
        << format_exact(p.stance_x) << ',' << format_exact(p.stance_z) << ',' << format_exact(p.head_pitch)
        << ',' << format_exact(p.sway) << ',' << format_exact(p.cut_bias_y) << ','
        << format_exact(p.angle_bias) << ',' << p.headset << ',' << p.platform << ',' << p.controller << ','
        << p.country << ',' << (p.handedness == Handedness::left ? "left" : "right") << ',' << p.seed << '\n';
  }
}

}  // namespace motionid
