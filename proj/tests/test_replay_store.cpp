#include <sstream>

#include "doctest.h"
#include "motionid/bsor.hpp"
#include "motionid/container.hpp"
#include "support.hpp"

using namespace motionid;
using testing::random_replay;

namespace {

ContainerErrc decode_error(std::span<const std::uint8_t> bytes) {
  try {
    decode_container(bytes);
  } catch (const ContainerError& e) {
    return e.code();
  }
  FAIL("decode accepted malformed bytes");
  return ContainerErrc::invalid_record;
}

}  // namespace

TEST_CASE("container round trip is exact") {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const Replay r = random_replay(rng, rng.below(200) + 1, rng.below(30));
    const auto bytes = encode_container(r);
    const Replay back = decode_container(bytes);
    REQUIRE(back == r);
    CHECK(encode_container(back) == bytes);
  }
}

TEST_CASE("container layout sizes") {
  Rng rng(1);
  Replay r = random_replay(rng, 3, 2);
  r.metadata.extra.clear();
  const auto bytes = encode_container(r);
  const auto empty_events = [&] {
    Replay copy = r;
    copy.events.clear();
    return encode_container(copy).size();
  }();
  CHECK(bytes.size() - empty_events == 2 * (8 + 5 + 16 * 4));
  CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "MIDR1");
}

TEST_CASE("stream writers agree with the encoder") {
  Rng rng(2);
  const Replay r = random_replay(rng, 40, 5);
  std::stringstream io;
  CHECK(write_container(r, io) == encode_container(r).size());
  CHECK(read_container(io) == r);
}

TEST_CASE("malformed containers are rejected with a code") {
  Rng rng(3);
  const auto bytes = encode_container(random_replay(rng, 20, 4));

  auto bad = bytes;
  bad[0] = 'X';
  CHECK(decode_error(bad) == ContainerErrc::bad_magic);

  bad = bytes;
  bad[5] = 9;
  CHECK(decode_error(bad) == ContainerErrc::version_mismatch);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{6}, bytes.size() / 2, bytes.size() - 1}) {
    CHECK(decode_error(std::span(bytes).first(cut)) == ContainerErrc::truncated);
  }

  bad = bytes;
  bad.push_back(0);
  CHECK(decode_error(bad) == ContainerErrc::invalid_record);
}

TEST_CASE("NaN poses are rejected on both sides") {
  Rng rng(4);
  Replay r = random_replay(rng, 10, 0);
  const auto good = encode_container(r);
  r.frames[3].left_hand.pos_y = std::nan("");
  std::stringstream sink;
  CHECK_THROWS_AS(write_container(r, sink), ReplayError);
  CHECK(sink.str().empty());

  // Patch the f32 bits of the same component into the good stream.
  auto bytes = good;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const std::size_t frames_start = bytes.size() - 8 - 10 * (8 + 21 * 4);
  const std::size_t offset = frames_start + 3 * (8 + 21 * 4) + 8 + 7 * 4 + 4;
  std::memcpy(&bytes[offset], &nan, 4);
  CHECK(decode_error(bytes) == ContainerErrc::nan_pose);
}

TEST_CASE("validation names the violated invariant") {
  Rng rng(5);
  const Replay base = random_replay(rng, 10, 3);
  CHECK_NOTHROW(validate(base));

  Replay r = base;
  r.metadata.user_id.clear();
  CHECK_THROWS_WITH(validate(r), "replay_store: user_id is empty");
  r = base;
  r.frames[4].time = r.frames[3].time;
  CHECK_THROWS_WITH(validate(r), "replay_store: frames not monotonic");
  r = base;
  r.events.back().event_time = r.frames.back().time + 1.0;
  CHECK_THROWS_WITH(validate(r), "replay_store: event outside the frame time range");
  r = base;
  r.events[0].cut_direction = 9;
  CHECK_THROWS_WITH(validate(r), "replay_store: event field out of range");
  r = base;
  r.frames[0].head.rot_i = r.frames[0].head.rot_j = r.frames[0].head.rot_k = r.frames[0].head.rot_w = 0.0;
  CHECK_THROWS_WITH(validate(r), "replay_store: zero quaternion");
}

TEST_CASE("canonical quaternions are unit with w >= 0 and stable") {
  Pose p;
  p.rot_i = 0.0;
  p.rot_j = 0.0;
  p.rot_k = 2.0;
  p.rot_w = -2.0;
  canonicalize(p);
  CHECK(p.rot_w > 0.0);
  CHECK(p.rot_k < 0.0);
  CHECK(p.rot_i * p.rot_i + p.rot_j * p.rot_j + p.rot_k * p.rot_k + p.rot_w * p.rot_w ==
        doctest::Approx(1.0).epsilon(1e-15));
  const Pose once = p;
  canonicalize(p);
  CHECK(p == once);
}

TEST_CASE("low quality replays are flagged by frame interval") {
  Rng rng(6);
  Replay r = random_replay(rng, 50, 0);
  CHECK_FALSE(r.low_quality());
  for (std::size_t i = 0; i < r.frames.size(); ++i) r.frames[i].time = 0.1 * static_cast<double>(i);
  CHECK(r.low_quality());
}

namespace {

void write_info(testing::BsorWriter& w, const std::string& player) {
  w.u8(0);
  w.str("0.8.1");
  w.str("1.29.1");
  w.str("1650000123");
  w.str(player);
  w.str("Player Name");
  w.str("steam");
  w.str("Oculus");
  w.str("Quest 2");
  w.str("Touch");
  w.str("abc123");
  w.str("Song");
  w.str("Mapper");
  w.str("ExpertPlus");
  w.i32(1000);
  w.str("Standard");
  w.str("Default");
  w.str("");
  w.f32(18.0f);
  w.u8(1);      // left handed
  w.f32(1.8f);  // height
  w.f32(0.0f);
  w.f32(0.0f);
  w.f32(1.0f);
}

void write_note(testing::BsorWriter& w, std::int32_t id, float time, std::int32_t type) {
  w.i32(id);
  w.f32(time);
  w.f32(time - 1.0f);
  w.i32(type);
  if (type == 2 || type == 3) return;
  w.u8(1);
  w.u8(1);
  w.u8(type == 0 ? 1 : 0);
  w.u8(0);
  w.f32(4.5f);                          // speed
  w.f32(0.0f), w.f32(-1.0f), w.f32(0.0f);  // direction
  w.i32(1);
  w.f32(0.01f);  // time deviation
  w.f32(3.0f);   // cut angle deviation
  w.f32(0.1f), w.f32(1.2f), w.f32(0.9f);
  w.f32(1.0f), w.f32(0.0f), w.f32(0.0f);
  w.f32(0.15f);  // distance to center
  w.f32(100.0f);
  w.f32(70.0f);
  w.f32(30.0f);
}

std::vector<std::uint8_t> bsor_fixture() {
  testing::BsorWriter w;
  w.u32(kBsorMagic);
  w.u8(kBsorVersion);
  write_info(w, "76561198000000000");
  w.u8(1);
  w.i32(5);
  const float times[] = {0.0f, 0.5f, 0.5f, 1.0f, 1.5f};
  for (float t : times) {
    w.f32(t);
    w.i32(72);
    w.pose(0.0f, 1.7f, 0.0f, 0.0f, 0.0f, 0.0f, -1.0f);
    w.pose(-0.3f, 1.0f, 0.2f, 0.0f, 0.0f, 0.0f, 1.0f);
    w.pose(0.3f, 1.0f, 0.2f, 0.0f, 0.0f, 0.0f, 1.0f);
  }
  w.u8(2);
  w.i32(5);
  write_note(w, 31215, 1.2f, 1);  // line 1 layer 2 color 1 dir 5
  write_note(w, 30003, 0.6f, 0);  // line 0 layer 0 color 0 dir 3
  write_note(w, 30100, 0.7f, 2);  // miss
  write_note(w, 30100, 0.8f, 3);  // bomb
  write_note(w, 30100, 9.0f, 0);  // after the last frame
  w.u8(3);
  w.i32(1);
  for (int i = 0; i < 4; ++i) w.f32(0.0f);
  w.u8(5);
  w.i32(0);
  w.u8(9);  // unknown trailer
  w.u8(42);
  return w.bytes;
}

}  // namespace

TEST_CASE("BSOR import maps the public layout") {
  const BsorImport imported = import_bsor(bsor_fixture());
  const Replay& r = imported.replay;
  CHECK(imported.dropped_events == 3);
  CHECK(imported.skipped_sections == 3);
  CHECK(r.metadata.user_id == "76561198000000000");
  CHECK(r.metadata.headset == "Quest 2");
  CHECK(r.metadata.recorded_at == 1650000123);
  CHECK(r.metadata.handedness == Handedness::left);
  CHECK(r.metadata.self_height == doctest::Approx(1.8));
  CHECK(r.metadata.fps_nominal == 72.0);
  REQUIRE(r.frames.size() == 4);  // duplicate timestamp dropped
  CHECK(r.frames[0].head.rot_w == 1.0);  // sign canonicalized
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].event_time == doctest::Approx(0.6));
  CHECK(r.events[0].cut_direction == 3);
  CHECK(r.events[0].color == Saber::left);
  CHECK(r.events[0].correct_saber);
  CHECK(r.events[1].line_index == 1);
  CHECK(r.events[1].line_layer == 2);
  CHECK(r.events[1].color == Saber::right);
  CHECK(r.events[1].cut_direction == 5);
  CHECK_FALSE(r.events[1].correct_saber);
  CHECK(r.events[1].saber_speed == doctest::Approx(4.5));
  CHECK(r.events[1].accuracy_score == doctest::Approx(0.5));

  // Imported values are doubles; one trip through the container quantizes
  // them, after which the form is stable.
  const Replay stored = decode_container(encode_container(r));
  CHECK(decode_container(encode_container(stored)) == stored);
}

TEST_CASE("BSOR import rejects foreign and truncated streams") {
  auto bytes = bsor_fixture();
  auto bad = bytes;
  bad[0] ^= 0xFF;
  CHECK_THROWS_AS(import_bsor(bad), ContainerError);
  bad = bytes;
  bad[4] = 2;
  try {
    import_bsor(bad);
    FAIL("accepted version 2");
  } catch (const ContainerError& e) {
    CHECK(e.code() == ContainerErrc::version_mismatch);
  }
  try {
    import_bsor(std::span(bytes).first(60));
    FAIL("accepted truncated stream");
  } catch (const ContainerError& e) {
    CHECK(e.code() == ContainerErrc::truncated);
  }
}
