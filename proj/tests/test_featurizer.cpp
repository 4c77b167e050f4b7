#include <algorithm>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "motionid/featurizer.hpp"
#include "support.hpp"

using namespace motionid;

namespace {

struct Stats {
  double min, max, mean, median, stdev;
};

// Sort-based reference statistics.
Stats reference(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const std::size_t h = v.size() / 2;
  const double median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return {v.front(), v.back(), mean, median, std::sqrt(ss / n)};
}

Pose from_euler(double roll, double pitch, double yaw) {
  const double cr = std::cos(roll / 2), sr = std::sin(roll / 2);
  const double cp = std::cos(pitch / 2), sp = std::sin(pitch / 2);
  const double cy = std::cos(yaw / 2), sy = std::sin(yaw / 2);
  Pose p;
  p.rot_w = cr * cp * cy + sr * sp * sy;
  p.rot_i = sr * cp * cy - cr * sp * sy;
  p.rot_j = cr * sp * cy + sr * cp * sy;
  p.rot_k = cr * cp * sy - sr * sp * cy;
  return p;
}

std::vector<Frame> random_window(Rng& rng, std::size_t n) {
  Replay r = testing::random_replay(rng, n, 0);
  return r.frames;
}

}  // namespace

TEST_CASE("variant dimensions and names") {
  const std::pair<Variant, std::size_t> expected[] = {{Variant::euler90, 90},
                                                      {Variant::quat105, 105},
                                                      {Variant::context22, 22},
                                                      {Variant::light127, 127},
                                                      {Variant::full232, 232}};
  for (auto [variant, dim] : expected) {
    CHECK(dimension(variant) == dim);
    CHECK(feature_names(variant).size() == dim);
    CHECK(parse_variant(variant_name(variant)) == variant);
    const auto names = feature_names(variant);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == dim);
  }
  CHECK_THROWS_AS(parse_variant("full233"), FeatureError);
}

TEST_CASE("featurize produces every variant's dimension") {
  Rng rng(1);
  const Replay r = testing::random_replay(rng, 600, 40);
  for (Variant v : {Variant::euler90, Variant::quat105, Variant::context22, Variant::light127,
                    Variant::full232}) {
    std::size_t produced = 0;
    for (const NoteEvent& e : r.events) {
      const auto f = featurize(r, e, v);
      CHECK(f.has_value() == featurizable(r, e, v));
      if (!f) continue;
      ++produced;
      CHECK(f->size() == dimension(v));
    }
    CHECK(produced > 0);
  }
}

TEST_CASE("motion statistics match a sort-based reference") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto window = random_window(rng, rng.below(60) + 2);
    const auto stats = *summarize_motion(window, 1);
    REQUIRE(stats.size() == 105);
    std::size_t index = 0;
    for (TrackedObject object : kTrackedObjects) {
      for (std::size_t c = 0; c < Pose::kComponents; ++c) {
        std::vector<double> column;
        for (const Frame& f : window) column.push_back(f.pose(object).components()[c]);
        const Stats ref = reference(column);
        CHECK(stats[index++] == ref.min);
        CHECK(stats[index++] == ref.max);
        CHECK(stats[index++] == doctest::Approx(ref.mean).epsilon(1e-12));
        CHECK(stats[index++] == ref.median);
        CHECK(stats[index++] == doctest::Approx(ref.stdev).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("statistics are order invariant and shift with translation") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto window = random_window(rng, rng.below(40) + 10);
    const auto base = *summarize_motion(window, 10);
    std::shuffle(window.begin(), window.end(), rng.engine());
    const auto shuffled = *summarize_motion(window, 10);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(shuffled[i] == doctest::Approx(base[i]).epsilon(1e-12));
    }
    const double dx = rng.uniform(-2, 2);
    for (Frame& f : window) f.head.pos_x += dx;
    const auto moved = *summarize_motion(window, 10);
    for (std::size_t s = 0; s < 4; ++s) CHECK(moved[s] == doctest::Approx(base[s] + dx).epsilon(1e-9));
    CHECK(moved[4] == doctest::Approx(base[4]).epsilon(1e-6));
    for (std::size_t i = 5; i < base.size(); ++i) CHECK(moved[i] == doctest::Approx(base[i]).epsilon(1e-12));
  }
}

TEST_CASE("short windows are dropped") {
  Rng rng(4);
  const auto window = random_window(rng, 9);
  CHECK_FALSE(summarize_motion(window, 10).has_value());
  CHECK(summarize_motion(window, 9).has_value());
  CHECK_FALSE(summarize_motion_euler(window, 10).has_value());
}

TEST_CASE("window boundaries are closed") {
  std::vector<Frame> frames(11);
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i].time = 0.1 * static_cast<double>(i);
  const auto w = frames_between(frames, frames[2].time, frames[5].time);
  CHECK(w.size() == 4);
  CHECK(w.front().time == frames[2].time);
  CHECK(frames_between(frames, 5.0, 6.0).empty());
}

TEST_CASE("full hybrid concatenates context, pre and post windows") {
  Rng rng(5);
  const Replay r = testing::random_replay(rng, 800, 20);
  const WindowSpec spec;
  for (const NoteEvent& e : r.events) {
    const auto full = featurize_full(r, e, spec);
    if (!full) continue;
    const auto ctx = *context_features(e);
    CHECK(std::equal(ctx.begin(), ctx.end(), full->begin()));
    const auto pre = *summarize_motion(frames_between(r.frames, e.event_time - 1.0, e.event_time), 10);
    const auto post = *summarize_motion(frames_between(r.frames, e.event_time, e.event_time + 1.0), 10);
    CHECK(std::equal(pre.begin(), pre.end(), full->begin() + 22));
    CHECK(std::equal(post.begin(), post.end(), full->begin() + 127));

    const auto light = *featurize_light(r, e, spec);
    const auto centered = *summarize_motion(frames_between(r.frames, e.event_time - 0.5, e.event_time + 0.5), 10);
    CHECK(std::equal(centered.begin(), centered.end(), light.begin() + 22));
  }
}

TEST_CASE("context features follow event field order") {
  NoteEvent e;
  e.event_time = 12.5;
  e.line_index = 3;
  e.line_layer = 1;
  e.color = Saber::right;
  e.cut_direction = 7;
  e.correct_saber = false;
  e.saber_speed = 4.0;
  e.accuracy_score = 0.9;
  const auto c = *context_features(e);
  CHECK(c[0] == 12.5);
  CHECK(c[1] == 3);
  CHECK(c[2] == 1);
  CHECK(c[3] == 1);
  CHECK(c[4] == 7);
  CHECK(c[5] == 0);
  CHECK(c[7] == 4.0);
  CHECK(c[21] == 0.9);
  e.saber_speed = std::numeric_limits<double>::infinity();
  CHECK_FALSE(context_features(e).has_value());
}

TEST_CASE("euler angles invert a known rotation") {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double roll = rng.uniform(-3.1, 3.1);
    const double pitch = rng.uniform(-1.5, 1.5);
    const double yaw = rng.uniform(-3.1, 3.1);
    const auto angles = euler_xyz(from_euler(roll, pitch, yaw));
    CHECK(angles[0] == doctest::Approx(roll).epsilon(1e-9));
    CHECK(angles[1] == doctest::Approx(pitch).epsilon(1e-9));
    CHECK(angles[2] == doctest::Approx(yaw).epsilon(1e-9));
  }
}

TEST_CASE("training sample draws") {
  Rng rng(7);
  std::vector<Replay> replays;
  for (int i = 0; i < 3; ++i) replays.push_back(testing::random_replay(rng, 500, 30, "carol"));
  std::vector<SessionReplay> sources;
  for (std::size_t i = 0; i < replays.size(); ++i) sources.push_back({&replays[i], "s" + std::to_string(i)});

  const auto all = featurize_all(sources, Variant::full232, {});
  REQUIRE(all.size() > 20);
  const auto few = sample_training_events(sources, Variant::full232, {}, 20, 9);
  CHECK(few.size() == 20);
  CHECK(sample_training_events(sources, Variant::full232, {}, 20, 9) == few);
  CHECK(sample_training_events(sources, Variant::full232, {}, 20, 10) != few);
  for (const auto& s : few) {
    CHECK(std::find(all.begin(), all.end(), s) != all.end());
    CHECK(s.user_id == "carol");
  }
  CHECK(sample_training_events(sources, Variant::full232, {}, 10000, 9) == all);
  CHECK(sample_training_events({}, Variant::full232, {}, 10, 9).empty());
}

TEST_CASE("feature kinds") {
  const auto proxy = default_static_proxy(Variant::full232);
  CHECK(proxy.size() == 8);
  const auto names = feature_names(Variant::full232);
  for (std::size_t i : proxy) CHECK(names[i].find(".head.pos_y.") != std::string::npos);
  const auto kinds = feature_kinds(Variant::full232);
  CHECK(std::count(kinds.begin(), kinds.end(), FeatureKind::context) == 22);
  CHECK(std::count(kinds.begin(), kinds.end(), FeatureKind::static_proxy) == 8);
  CHECK(std::count(kinds.begin(), kinds.end(), FeatureKind::motion) == 202);
  CHECK(default_static_proxy(Variant::context22).empty());
}

TEST_CASE("feature file round trip") {
  Rng rng(8);
  std::vector<FeatureVector> samples;
  for (int i = 0; i < 5; ++i) {
    FeatureVector v{"u" + std::to_string(i), "u:s000", rng.uniform(0, 100), Variant::context22, {}};
    for (int d = 0; d < 22; ++d) v.values.push_back(rng.normal());
    samples.push_back(v);
  }
  std::stringstream io;
  write_feature_file(samples, Variant::context22, io);
  CHECK(io.str().rfind("context22,22,5\n", 0) == 0);
  Variant variant{};
  CHECK(read_feature_file(io, &variant) == samples);
  CHECK(variant == Variant::context22);
  std::istringstream wrong("context22,22,1\nu,s,0,1,2\n");
  CHECK_THROWS_AS(read_feature_file(wrong), FeatureError);
}
