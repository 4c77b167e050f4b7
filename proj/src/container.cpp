#include "motionid/container.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include "byte_io.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

namespace detail {

std::vector<std::uint8_t> read_all(std::istream& in) {
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

}  // namespace detail

namespace {

constexpr std::string_view kMagic = "MIDR1";

[[noreturn]] void fail(ContainerErrc code, const std::string& message) {
  throw ContainerError(code, message);
}

std::vector<std::pair<std::string, std::string>> metadata_pairs(const ReplayMetadata& m) {
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"user_id", m.user_id},
      {"platform", m.platform},
      {"runtime", m.runtime},
      {"headset", m.headset},
      {"controller", m.controller},
      {"self_height", text::format_exact(m.self_height)},
      {"handedness", m.handedness == Handedness::left ? "left" : "right"},
      {"country", m.country},
      {"recorded_at", std::to_string(m.recorded_at)},
      {"fps_nominal", text::format_exact(m.fps_nominal)},
  };
  for (const auto& [key, value] : m.extra) pairs.emplace_back(key, value);
  return pairs;
}

void apply_metadata(ReplayMetadata& m, const std::string& key, const std::string& value) {
  try {
    if (key == "user_id") m.user_id = value;
    else if (key == "platform") m.platform = value;
    else if (key == "runtime") m.runtime = value;
    else if (key == "headset") m.headset = value;
    else if (key == "controller") m.controller = value;
    else if (key == "self_height") m.self_height = text::parse_double(value);
    else if (key == "handedness") {
      if (value != "left" && value != "right") fail(ContainerErrc::invalid_record, "bad handedness");
      m.handedness = value == "left" ? Handedness::left : Handedness::right;
    } else if (key == "country") m.country = value;
    else if (key == "recorded_at") m.recorded_at = text::parse_int(value);
    else if (key == "fps_nominal") m.fps_nominal = text::parse_double(value);
    else m.extra[key] = value;
  } catch (const std::invalid_argument& e) {
    fail(ContainerErrc::invalid_record, "metadata '" + key + "': " + e.what());
  }
}

void write_pose(detail::ByteWriter& out, const Pose& pose) {
  for (double v : pose.components()) out.f32(static_cast<float>(v));
}

// Stored quaternions carry f32 rounding; renormalizing those would make
// every read perturb the pose, so only visibly non-unit ones are rescaled.
constexpr double kStoredUnitTolerance = 1e-6;

void canonicalize_stored(Replay& replay) {
  for (Frame& frame : replay.frames) {
    for (TrackedObject object : kTrackedObjects) {
      Pose& pose = frame.pose(object);
      const double norm2 = pose.rot_i * pose.rot_i + pose.rot_j * pose.rot_j +
                           pose.rot_k * pose.rot_k + pose.rot_w * pose.rot_w;
      if (std::abs(norm2 - 1.0) > kStoredUnitTolerance) {
        canonicalize(pose);
      } else if (pose.rot_w < 0.0) {
        pose.rot_i = -pose.rot_i;
        pose.rot_j = -pose.rot_j;
        pose.rot_k = -pose.rot_k;
        pose.rot_w = -pose.rot_w;
      }
    }
  }
}

}  // namespace

std::vector<std::uint8_t> encode_container(const Replay& replay) {
  validate(replay);
  detail::ByteWriter out;
  out.raw(kMagic);
  out.u16(kContainerVersion);

  const auto pairs = metadata_pairs(replay.metadata);
  out.u32(static_cast<std::uint32_t>(pairs.size()));
  for (const auto& [key, value] : pairs) {
    out.u32(static_cast<std::uint32_t>(key.size()));
    out.raw(key);
    out.u32(static_cast<std::uint32_t>(value.size()));
    out.raw(value);
  }

  out.u64(replay.frames.size());
  for (const Frame& frame : replay.frames) {
    out.f64(frame.time);
    write_pose(out, frame.head);
    write_pose(out, frame.left_hand);
    write_pose(out, frame.right_hand);
  }

  out.u64(replay.events.size());
  for (const NoteEvent& event : replay.events) {
    out.f64(event.event_time);
    out.u8(event.line_index);
    out.u8(event.line_layer);
    out.u8(static_cast<std::uint8_t>(event.color));
    out.u8(event.cut_direction);
    out.u8(event.correct_saber ? 1 : 0);
    for (double v : event.kinematics()) out.f32(static_cast<float>(v));
  }
  return std::move(out.bytes());
}

std::size_t write_container(const Replay& replay, std::ostream& sink) {
  const auto bytes = encode_container(replay);
  sink.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw ReplayError("write failed");
  return bytes.size();
}

Replay decode_container(std::span<const std::uint8_t> bytes) {
  auto truncated = [] { fail(ContainerErrc::truncated, "truncated stream"); };
  detail::ByteReader in(bytes, truncated);

  if (bytes.size() < kMagic.size()) truncated();
  if (in.raw(kMagic.size()) != kMagic) fail(ContainerErrc::bad_magic, "bad magic");
  const auto version = in.u16();
  if (version != kContainerVersion) {
    fail(ContainerErrc::version_mismatch,
         "unsupported container version " + std::to_string(version));
  }

  Replay replay;
  const auto pair_count = in.u32();
  for (std::uint32_t i = 0; i < pair_count; ++i) {
    const std::string key = in.raw(in.u32());
    const std::string value = in.raw(in.u32());
    apply_metadata(replay.metadata, key, value);
  }

  const auto frame_count = in.u64();
  // 8 + 21*4 bytes per frame; reject impossible counts before reserving.
  if (frame_count > in.remaining() / 92) truncated();
  replay.frames.resize(frame_count);
  for (Frame& frame : replay.frames) {
    frame.time = in.f64();
    for (TrackedObject object : kTrackedObjects) {
      Pose& pose = frame.pose(object);
      pose.pos_x = in.f32();
      pose.pos_y = in.f32();
      pose.pos_z = in.f32();
      pose.rot_i = in.f32();
      pose.rot_j = in.f32();
      pose.rot_k = in.f32();
      pose.rot_w = in.f32();
      for (double v : pose.components()) {
        if (std::isnan(v)) fail(ContainerErrc::nan_pose, "NaN pose component");
      }
    }
  }

  const auto event_count = in.u64();
  if (event_count > in.remaining() / 77) truncated();
  replay.events.resize(event_count);
  for (NoteEvent& event : replay.events) {
    event.event_time = in.f64();
    event.line_index = in.u8();
    event.line_layer = in.u8();
    const auto color = in.u8();
    if (color > 1) fail(ContainerErrc::invalid_record, "bad saber color");
    event.color = static_cast<Saber>(color);
    event.cut_direction = in.u8();
    event.correct_saber = in.u8() != 0;
    std::array<double, NoteEvent::kKinematicValues> values{};
    for (double& v : values) v = in.f32();
    event.set_kinematics(values);
  }
  if (!in.at_end()) fail(ContainerErrc::invalid_record, "trailing bytes after event block");

  canonicalize_stored(replay);
  try {
    validate(replay);
  } catch (const ReplayError& e) {
    fail(ContainerErrc::invalid_record, e.what());
  }
  return replay;
}

Replay read_container(std::istream& source) {
  const auto bytes = detail::read_all(source);
  return decode_container(bytes);
}

Replay load_replay_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReplayError("cannot open " + path);
  return read_container(in);
}

void save_replay_file(const Replay& replay, const std::string& path) {
  const auto bytes = encode_container(replay);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReplayError("cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ReplayError("write failed: " + path);
}

}  // namespace motionid
