#include <sstream>

#include "doctest.h"
#include "motionid/container.hpp"
#include "motionid/featurizer.hpp"
#include "motionid/synthgen.hpp"

using namespace motionid;

namespace {

double mean_head_y(const Replay& r) {
  double sum = 0.0;
  for (const Frame& f : r.frames) sum += f.head.pos_y;
  return sum / static_cast<double>(r.frames.size());
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  const UserProfile a = generate_user(11, 3);
  CHECK(generate_user(11, 3) == a);
  CHECK_FALSE(generate_user(12, 3) == a);
  CHECK_FALSE(generate_user(11, 4) == a);
  CHECK(a.user_id == "u00003");

  CorpusSpec spec;
  spec.sessions_per_user = 2;
  spec.replays_per_session = 2;
  spec.notes_per_replay = 20;
  const auto first = generate_user_replays(a, spec);
  const auto second = generate_user_replays(a, spec);
  REQUIRE(first.size() == 4);
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(encode_container(first[i]) == encode_container(second[i]));
  }
}

TEST_CASE("replays are valid and laid out in sessions") {
  const UserProfile p = generate_user(1, 0);
  CorpusSpec spec;
  spec.sessions_per_user = 3;
  spec.replays_per_session = 2;
  spec.notes_per_replay = 30;
  const auto replays = generate_user_replays(p, spec);
  REQUIRE(replays.size() == 6);
  for (std::size_t i = 0; i < replays.size(); ++i) {
    const Replay& r = replays[i];
    CHECK_NOTHROW(validate(r));
    CHECK(r.events.size() == 30);
    CHECK_FALSE(r.low_quality());
    CHECK(r.metadata.user_id == p.user_id);
    CHECK(r.metadata.self_height == p.height);
    if (i % 2 == 1) {
      CHECK(r.start_time() - replays[i - 1].end_time() <= 60.0);
    } else if (i > 0) {
      CHECK(r.start_time() - replays[i - 1].end_time() > 600.0);
    }
  }
  CHECK(replays[0].replay_id() == "u00000:s000:r000");
  CHECK(replays[3].replay_id() == "u00000:s001:r001");
  for (const NoteEvent& e : replays[0].events) CHECK(featurizable(replays[0], e, Variant::full232));
}

TEST_CASE("a 0.3 m taller user carries the headset 0.3 m higher") {
  SynthPriors short_priors, tall_priors;
  short_priors.fixed_height = 1.5;
  tall_priors.fixed_height = 1.8;
  short_priors.equalize_style = tall_priors.equalize_style = true;
  const Replay low = generate_replay(generate_user(5, 0, short_priors), 0, 40, 60.0, 1.0);
  const Replay high = generate_replay(generate_user(5, 0, tall_priors), 0, 40, 60.0, 1.0);
  CHECK(mean_head_y(high) - mean_head_y(low) == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("priors") {
  SynthPriors p;
  CHECK_NOTHROW(p.validate());
  double total = 0.0;
  for (const auto& band : p.height_bands) total += band.weight;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-3));

  SynthPriors bad = p;
  bad.fixed_height = 3.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = p;
  bad.height_bands[0].weight = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = p;
  bad.style_spread = -0.5;
  CHECK_THROWS_AS(bad.validate(), Error);

  SynthPriors same;
  same.equalize_style = true;
  const UserProfile a = generate_user(2, 0, same), b = generate_user(2, 1, same);
  CHECK(a.swing_amplitude == b.swing_amplitude);
  CHECK(a.lead_time == b.lead_time);
  CHECK(a.height != b.height);

  SynthPriors fixed;
  fixed.fixed_height = 1.7;
  for (std::size_t i = 0; i < 5; ++i) CHECK(generate_user(9, i, fixed).height == 1.7);

  std::size_t in_range = 0;
  for (std::size_t i = 0; i < 400; ++i) {
    const double h = generate_user(4, i).height;
    in_range += h >= 1.35 && h < 2.05;
  }
  CHECK(in_range == 400);
}

TEST_CASE("profile manifest lists one line per user") {
  const std::vector<UserProfile> users = {generate_user(1, 0), generate_user(1, 1)};
  std::ostringstream out;
  write_profile_manifest(users, out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.rfind("user_id,height,", 0) == 0);
  CHECK(text.find("\nu00001,") != std::string::npos);
}
