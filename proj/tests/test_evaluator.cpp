#include <set>
#include <sstream>

#include "doctest.h"
#include "motionid/evaluator.hpp"
#include "motionid/rng.hpp"

using namespace motionid;

namespace {

// Each sample's single feature names the user it votes for.
class VoteIdentifier final : public Identifier {
 public:
  explicit VoteIdentifier(std::vector<std::string> ids) : ids_(std::move(ids)) {}
  std::span<const std::string> users() const override { return ids_; }
  Matrix sample_scores(const Matrix& samples) const override {
    Matrix out(samples.rows(), ids_.size(), 0.0);
    for (std::size_t r = 0; r < samples.rows(); ++r) out(r, static_cast<std::size_t>(samples(r, 0))) = 1.0;
    return out;
  }

 private:
  std::vector<std::string> ids_;
};

TestSet votes(UserIndex user, std::vector<double> picks, const std::string& session = "s") {
  TestSet t;
  t.user = user;
  t.samples = Matrix(picks.size(), 1);
  for (std::size_t r = 0; r < picks.size(); ++r) {
    t.samples(r, 0) = picks[r];
    t.session_ids.push_back(session);
  }
  return t;
}

}  // namespace

TEST_CASE("accuracies on a scripted identifier") {
  const VoteIdentifier id({"a", "b", "c", "d"});
  const std::vector<TestSet> tests = {votes(0, {0, 0, 1}), votes(1, {0, 2, 2, 1}), votes(2, {2}),
                                      votes(3, {})};
  EvalOptions options;
  options.samples_per_user = 3;
  options.top_k = {1, 2, 3};
  options.curve_counts = {1, 2};
  const EvalReport r = evaluate(id, tests, options);
  CHECK(r.users_evaluated == 3);
  CHECK(r.users_excluded == 1);
  CHECK(r.samples_evaluated == 7);
  CHECK(r.per_sample_accuracy == doctest::Approx(3.0 / 7.0));
  CHECK(r.per_user_accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(r.top_k_accuracies.at(1) == doctest::Approx(2.0 / 3.0));
  // User b: scores a=1, b=0, c=2, d=0, so b ranks third behind c and a.
  CHECK(r.top_k_accuracies.at(2) == doctest::Approx(2.0 / 3.0));
  CHECK(r.top_k_accuracies.at(3) == doctest::Approx(1.0));
  CHECK(r.outcomes[1].rank == 3);
  CHECK(r.accuracy_by_sample_count.at(1) == doctest::Approx(2.0 / 3.0));
  CHECK(r.accuracy_by_sample_count.at(2) == doctest::Approx(2.0 / 3.0));
  CHECK(r.seconds_per_user(50) == 100.0);

  std::ostringstream report, outcomes;
  write_report(r, report);
  CHECK(report.str().find("per_user_accuracy = 0.6666666666666666\n") != std::string::npos);
  CHECK(report.str().find("accuracy_at_2_samples = 0.6666666666666666  # 4 s\n") != std::string::npos);
  write_user_outcomes(r, id.users(), outcomes);
  CHECK(outcomes.str() == "user_id,correct,rank,samples,samples_correct\na,1,1,3,2\nb,0,3,3,0\nc,1,1,1,1\n");
}

TEST_CASE("aggregation ties fall to the smaller user id") {
  const VoteIdentifier id({"b", "a"});
  const std::vector<TestSet> tests = {votes(0, {0, 1})};
  const auto curve = accuracy_curve(id, tests, std::vector<std::size_t>{1, 2});
  CHECK(curve.at(1) == 1.0);
  CHECK(curve.at(2) == 0.0);
}

TEST_CASE("samples outside the test sessions are refused") {
  const VoteIdentifier id({"a", "b"});
  const std::set<std::string> allowed = {"a:s003"};
  std::vector<TestSet> tests = {votes(0, {0, 0}, "a:s003")};
  EvalOptions options;
  options.test_sessions = &allowed;
  CHECK_NOTHROW(evaluate(id, tests, options));
  tests.push_back(votes(1, {1}, "b:s000"));
  CHECK_THROWS_WITH(evaluate(id, tests, options), "evaluator: sample from session b:s000 is not a test session");
  options.samples_per_user = 0;
  CHECK_THROWS_AS(evaluate(id, tests, options), EvalError);
  CHECK_THROWS_AS(evaluate(id, std::vector<TestSet>{votes(0, {})}), EvalError);
}

TEST_CASE("attribute bands") {
  CHECK(height_band(std::nullopt) == "unknown");
  CHECK(height_band(1.5) == "<=1.5");
  CHECK(height_band(1.55) == "1.5-1.6");
  CHECK(height_band(1.6) == "1.6-1.7");
  CHECK(height_band(1.89) == "1.8-1.9");
  CHECK(height_band(1.9) == ">=1.9");
  CHECK(replay_count_band(std::nullopt) == "unknown");
  CHECK(replay_count_band(5) == "<=5");
  CHECK(replay_count_band(6) == "6-10");
  CHECK(replay_count_band(24) == "11-24");
  CHECK(replay_count_band(99) == "25-99");
  CHECK(replay_count_band(100) == ">=100");
}

TEST_CASE("each factor partitions the evaluated users") {
  Rng rng(3);
  EvalReport report;
  std::vector<UserAttributes> attributes;
  std::size_t correct = 0;
  const char* headsets[] = {"Quest 2", "Index", ""};
  for (UserIndex u = 0; u < 300; ++u) {
    UserAttributes a;
    a.headset = headsets[rng.below(3)];
    a.platform = rng.uniform() < 0.5 ? "steam" : "oculus";
    a.handedness = rng.uniform() < 0.1 ? "left" : "right";
    if (rng.uniform() < 0.9) a.height = rng.uniform(1.4, 2.0);
    if (rng.uniform() < 0.9) a.replay_count = rng.below(300);
    attributes.push_back(a);
    UserOutcome o;
    o.user = u;
    o.correct = rng.uniform() < 0.8;
    correct += o.correct;
    report.outcomes.push_back(o);
  }
  impact_factors(report, attributes);
  const double overall = static_cast<double>(correct) / 300.0;
  for (const char* factor : {"headset", "platform", "country", "handedness", "height", "replay_count"}) {
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& [key, accuracy] : report.group_accuracies) {
      if (key.first != factor) continue;
      weighted += accuracy * static_cast<double>(report.group_sizes.at(key));
      total += report.group_sizes.at(key);
    }
    CHECK(total == 300);
    CHECK(weighted / 300.0 == doctest::Approx(overall).epsilon(1e-12));
  }
  CHECK(report.group_sizes.count({"country", "unknown"}) == 1);
  CHECK(report.group_sizes.count({"headset", "unknown"}) == 1);
}
