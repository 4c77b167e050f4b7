#include "motionid/bsor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>

#include "byte_io.hpp"
#include "motionid/container.hpp"

namespace motionid {

namespace {

enum Section : std::uint8_t { kInfo = 0, kFrames = 1, kNotes = 2, kWalls = 3, kHeights = 4, kPauses = 5 };
enum NoteEventType : std::int32_t { kGood = 0, kBad = 1, kMiss = 2, kBomb = 3 };

[[noreturn]] void fail(ContainerErrc code, const std::string& message) {
  throw ContainerError(code, "bsor: " + message);
}

template <typename Reader>
std::string read_string(Reader& in) {
  const auto length = in.i32();
  if (length < 0) fail(ContainerErrc::invalid_record, "negative string length");
  return in.raw(static_cast<std::size_t>(length));
}

template <typename Reader>
Pose read_pose(Reader& in) {
  Pose pose;
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
  return pose;
}

std::int64_t parse_timestamp(const std::string& text) {
  std::int64_t value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  return result.ec == std::errc() ? value : 0;
}

template <typename Reader>
void read_info(Reader& in, ReplayMetadata& m) {
  m.extra["bsor_mod_version"] = read_string(in);
  m.extra["game_version"] = read_string(in);
  m.recorded_at = parse_timestamp(read_string(in));
  m.user_id = read_string(in);
  m.extra["player_name"] = read_string(in);
  m.platform = read_string(in);
  m.runtime = read_string(in);  // tracking system
  m.headset = read_string(in);
  m.controller = read_string(in);
  m.extra["map_hash"] = read_string(in);
  m.extra["song_name"] = read_string(in);
  m.extra["mapper"] = read_string(in);
  m.extra["difficulty"] = read_string(in);
  in.i32();           // score
  read_string(in);    // mode
  read_string(in);    // environment
  read_string(in);    // modifiers
  in.f32();           // jump distance
  m.handedness = in.u8() != 0 ? Handedness::left : Handedness::right;
  m.self_height = in.f32();
  in.f32();  // practice start time
  in.f32();  // fail time
  in.f32();  // speed
}

template <typename Reader>
void read_frames(Reader& in, Replay& replay) {
  const auto count = in.i32();
  if (count < 0) fail(ContainerErrc::invalid_record, "negative frame count");
  std::vector<std::int32_t> fps;
  fps.reserve(static_cast<std::size_t>(count));
  for (std::int32_t i = 0; i < count; ++i) {
    Frame frame;
    frame.time = in.f32();
    fps.push_back(in.i32());
    frame.head = read_pose(in);
    frame.left_hand = read_pose(in);
    frame.right_hand = read_pose(in);
    // Paused or duplicated frames repeat a timestamp; keep the first.
    if (!replay.frames.empty() && !(frame.time > replay.frames.back().time)) continue;
    replay.frames.push_back(frame);
  }
  if (!fps.empty()) {
    auto mid = fps.begin() + static_cast<std::ptrdiff_t>(fps.size() / 2);
    std::nth_element(fps.begin(), mid, fps.end());
    replay.metadata.fps_nominal = *mid;
  }
}

template <typename Reader>
std::size_t read_notes(Reader& in, Replay& replay) {
  const auto count = in.i32();
  if (count < 0) fail(ContainerErrc::invalid_record, "negative note count");
  std::size_t dropped = 0;
  for (std::int32_t i = 0; i < count; ++i) {
    const auto note_id = in.i32();
    const float event_time = in.f32();
    in.f32();  // spawn time
    const auto type = in.i32();
    if (type != kGood && type != kBad) {
      ++dropped;
      continue;
    }
    in.u8();  // speed ok
    in.u8();  // direction ok
    const bool saber_type_ok = in.u8() != 0;
    in.u8();  // cut too soon
    NoteEvent event;
    event.event_time = event_time;
    event.saber_speed = in.f32();
    event.saber_dir_x = in.f32();
    event.saber_dir_y = in.f32();
    event.saber_dir_z = in.f32();
    in.i32();  // saber type
    event.time_deviation = in.f32();
    event.cut_angle_deviation = in.f32();
    event.cut_point_x = in.f32();
    event.cut_point_y = in.f32();
    event.cut_point_z = in.f32();
    event.cut_normal_x = in.f32();
    event.cut_normal_y = in.f32();
    event.cut_normal_z = in.f32();
    event.distance_to_center = in.f32();
    in.f32();  // cut angle
    event.before_cut_rating = in.f32();
    event.after_cut_rating = in.f32();
    event.accuracy_score = 1.0 - std::min(1.0, std::abs(event.distance_to_center) / 0.3);
    event.correct_saber = saber_type_ok;

    // noteID = scoring*10000 + line*1000 + layer*100 + color*10 + direction
    const auto id = note_id < 0 ? -note_id : note_id;
    event.cut_direction = static_cast<std::uint8_t>(id % 10);
    const auto color = (id / 10) % 10;
    event.line_layer = static_cast<std::uint8_t>((id / 100) % 10);
    event.line_index = static_cast<std::uint8_t>((id / 1000) % 10);
    if (event.cut_direction > 8 || color > 1 || event.line_layer > 2 || event.line_index > 3 ||
        !event.has_cut()) {
      ++dropped;
      continue;
    }
    event.color = static_cast<Saber>(color);
    replay.events.push_back(event);
  }
  return dropped;
}

}  // namespace

BsorImport import_bsor(std::span<const std::uint8_t> bytes) {
  auto truncated = [] { fail(ContainerErrc::truncated, "truncated stream"); };
  detail::ByteReader in(bytes, truncated);

  if (in.u32() != kBsorMagic) fail(ContainerErrc::bad_magic, "bad magic");
  const auto version = in.u8();
  if (version != kBsorVersion) {
    fail(ContainerErrc::version_mismatch, "unsupported BSOR version " + std::to_string(version));
  }

  BsorImport result;
  Replay& replay = result.replay;
  bool have_info = false, have_frames = false;
  while (!in.at_end()) {
    const auto section = in.u8();
    switch (section) {
      case kInfo:
        read_info(in, replay.metadata);
        have_info = true;
        break;
      case kFrames:
        read_frames(in, replay);
        have_frames = true;
        break;
      case kNotes:
        result.dropped_events += read_notes(in, replay);
        break;
      case kWalls: {
        const auto count = in.i32();
        in.skip(static_cast<std::size_t>(std::max(count, 0)) * 16);
        ++result.skipped_sections;
        break;
      }
      case kHeights: {
        const auto count = in.i32();
        in.skip(static_cast<std::size_t>(std::max(count, 0)) * 8);
        ++result.skipped_sections;
        break;
      }
      case kPauses: {
        const auto count = in.i32();
        in.skip(static_cast<std::size_t>(std::max(count, 0)) * 12);
        ++result.skipped_sections;
        break;
      }
      default:
        // Later sections are not self-delimiting; nothing past them is needed.
        ++result.skipped_sections;
        in.skip(in.remaining());
        break;
    }
  }
  if (!have_info) fail(ContainerErrc::invalid_record, "missing info section");
  if (!have_frames || replay.frames.empty()) fail(ContainerErrc::invalid_record, "no frames");

  // Notes outside the recorded telemetry cannot be featurized.
  const double first = replay.frames.front().time;
  const double last = replay.frames.back().time;
  const auto before = replay.events.size();
  std::erase_if(replay.events, [&](const NoteEvent& e) {
    return e.event_time < first || e.event_time > last;
  });
  result.dropped_events += before - replay.events.size();
  std::stable_sort(replay.events.begin(), replay.events.end(),
                   [](const NoteEvent& a, const NoteEvent& b) { return a.event_time < b.event_time; });

  canonicalize(replay);
  try {
    validate(replay);
  } catch (const ReplayError& e) {
    fail(ContainerErrc::invalid_record, e.what());
  }
  return result;
}

BsorImport import_bsor(std::istream& source) {
  const auto bytes = detail::read_all(source);
  return import_bsor(bytes);
}

}  // namespace motionid
