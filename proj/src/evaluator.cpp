#include "motionid/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "motionid/gbdt.hpp"
#include "motionid/parallel.hpp"
#include "motionid/text_io.hpp"

namespace motionid {

namespace {

Matrix first_rows(const Matrix& samples, std::size_t count) {
  const std::size_t n = std::min(count, samples.rows());
  Matrix out(n, samples.cols());
  std::copy(samples.data().begin(), samples.data().begin() + static_cast<std::ptrdiff_t>(n * samples.cols()),
            out.data().begin());
  return out;
}

Matrix single_row(const Matrix& samples, std::size_t r) {
  Matrix out(1, samples.cols());
  const auto row = samples.row(r);
  std::copy(row.begin(), row.end(), out.data().begin());
  return out;
}

std::vector<double> column_sums(const Matrix& scores, std::size_t rows) {
  std::vector<double> sums(scores.cols(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t u = 0; u < sums.size(); ++u) sums[u] += scores(r, u);
  }
  return sums;
}

std::size_t rank_of(const std::vector<UserIndex>& ranking, UserIndex user) {
  const auto it = std::find(ranking.begin(), ranking.end(), user);
  return it == ranking.end() ? ranking.size() + 1 : static_cast<std::size_t>(it - ranking.begin()) + 1;
}

}  // namespace

std::vector<UserIndex> Identifier::decide(std::span<const double> aggregate, const Matrix&) const {
  return rank_users(aggregate, users());
}

Matrix HierarchyIdentifier::sample_scores(const Matrix& samples) const {
  return sample_log_scores(model_, samples, mode_);
}

std::vector<UserIndex> HierarchyIdentifier::decide(std::span<const double> aggregate,
                                                   const Matrix& samples) const {
  return motionid::decide(model_, std::vector<double>(aggregate.begin(), aggregate.end()), samples, mode_)
      .ranking;
}

EvalReport evaluate(const Identifier& identifier, std::span<const TestSet> tests, const EvalOptions& options) {
  if (options.samples_per_user == 0) throw EvalError("samples_per_user must be positive");
  for (std::size_t k : options.top_k) {
    if (k == 0) throw EvalError("top-k values must be positive");
  }
  const std::size_t user_count = identifier.users().size();
  for (const TestSet& t : tests) {
    if (t.user >= user_count) throw EvalError("test user outside the model's users");
    if (!t.session_ids.empty() && t.session_ids.size() != t.samples.rows()) {
      throw EvalError("session ids do not match the samples of user " + identifier.users()[t.user]);
    }
    if (options.test_sessions) {
      const std::size_t used = std::min(options.samples_per_user, t.samples.rows());
      if (t.session_ids.size() < used) throw EvalError("test samples lack session ids");
      for (std::size_t r = 0; r < used; ++r) {
        if (!options.test_sessions->contains(t.session_ids[r])) {
          throw EvalError("sample from session " + t.session_ids[r] + " is not a test session");
        }
      }
    }
  }

  std::vector<UserOutcome> outcomes(tests.size());
  std::vector<std::map<std::size_t, bool>> curve_hits(tests.size());
  parallel_for(tests.size(), resolve_parallelism(0), [&](std::size_t i) {
    const TestSet& t = tests[i];
    UserOutcome& o = outcomes[i];
    o.user = t.user;
    if (t.samples.empty()) return;
    const Matrix samples = first_rows(t.samples, options.samples_per_user);
    const Matrix scores = identifier.sample_scores(samples);
    o.samples = samples.rows();
    for (std::size_t r = 0; r < samples.rows(); ++r) {
      const auto row = scores.row(r);
      const auto ranking = identifier.decide(row, single_row(samples, r));
      if (!ranking.empty() && ranking.front() == t.user) ++o.samples_correct;
    }
    const auto ranking = identifier.decide(column_sums(scores, samples.rows()), samples);
    o.rank = rank_of(ranking, t.user);
    o.correct = o.rank == 1;
    for (std::size_t count : options.curve_counts) {
      if (count == 0) continue;
      const std::size_t n = std::min(count, samples.rows());
      const Matrix head = first_rows(samples, n);
      curve_hits[i][count] = identifier.decide(column_sums(scores, n), head).front() == t.user;
    }
  });

  EvalReport report;
  std::size_t users_correct = 0, samples_correct = 0;
  std::map<std::size_t, std::size_t> topk_hits, curve_correct;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const UserOutcome& o = outcomes[i];
    if (o.samples == 0) {
      ++report.users_excluded;
      continue;
    }
    ++report.users_evaluated;
    report.samples_evaluated += o.samples;
    samples_correct += o.samples_correct;
    if (o.correct) ++users_correct;
    for (std::size_t k : options.top_k) {
      if (o.rank <= k) ++topk_hits[k];
    }
    for (const auto& [count, hit] : curve_hits[i]) curve_correct[count] += hit ? 1 : 0;
    report.outcomes.push_back(o);
  }
  if (report.users_evaluated == 0) throw EvalError("no user has test samples");
  const auto users = static_cast<double>(report.users_evaluated);
  report.per_user_accuracy = static_cast<double>(users_correct) / users;
  report.per_sample_accuracy =
      static_cast<double>(samples_correct) / static_cast<double>(report.samples_evaluated);
  for (std::size_t k : options.top_k) report.top_k_accuracies[k] = static_cast<double>(topk_hits[k]) / users;
  for (std::size_t count : options.curve_counts) {
    if (count > 0) report.accuracy_by_sample_count[count] = static_cast<double>(curve_correct[count]) / users;
  }
  return report;
}

std::map<std::size_t, double> accuracy_curve(const Identifier& identifier, std::span<const TestSet> tests,
                                             std::span<const std::size_t> counts) {
  EvalOptions options;
  options.curve_counts.assign(counts.begin(), counts.end());
  for (std::size_t c : counts) {
    if (c == 0) throw EvalError("curve counts must be at least 1");
  }
  options.samples_per_user = counts.empty() ? 1 : *std::max_element(counts.begin(), counts.end());
  return evaluate(identifier, tests, options).accuracy_by_sample_count;
}

std::string replay_count_band(std::optional<std::size_t> replays) {
  if (!replays) return "unknown";
  const std::size_t n = *replays;
  if (n <= 5) return "<=5";
  if (n <= 10) return "6-10";
  if (n <= 24) return "11-24";
  if (n <= 99) return "25-99";
  return ">=100";
}

std::string height_band(std::optional<double> height) {
  if (!height || !std::isfinite(*height)) return "unknown";
  const double h = *height;
  if (h <= 1.5) return "<=1.5";
  if (h < 1.6) return "1.5-1.6";
  if (h < 1.7) return "1.6-1.7";
  if (h < 1.8) return "1.7-1.8";
  if (h < 1.9) return "1.8-1.9";
  return ">=1.9";
}

void impact_factors(EvalReport& report, std::span<const UserAttributes> attributes) {
  std::map<std::pair<std::string, std::string>, std::size_t> correct;
  report.group_sizes.clear();
  report.group_accuracies.clear();
  auto bucket = [](const std::string& v) { return v.empty() ? std::string("unknown") : v; };
  for (const UserOutcome& o : report.outcomes) {
    if (o.user >= attributes.size()) throw EvalError("no attributes for an evaluated user");
    const UserAttributes& a = attributes[o.user];
    const std::pair<std::string, std::string> keys[] = {
        {"headset", bucket(a.headset)},
        {"platform", bucket(a.platform)},
        {"country", bucket(a.country)},
        {"handedness", bucket(a.handedness)},
        {"height", height_band(a.height)},
        {"replay_count", replay_count_band(a.replay_count)},
    };
    for (const auto& key : keys) {
      ++report.group_sizes[key];
      if (o.correct) ++correct[key];
    }
  }
  for (const auto& [key, size] : report.group_sizes) {
    report.group_accuracies[key] = static_cast<double>(correct[key]) / static_cast<double>(size);
  }
}

std::map<std::string, double> importance_by_type(const HierarchicalModel& model,
                                                 std::span<const FeatureKind> schema) {
  std::vector<double> gain(schema.size(), 0.0);
  std::size_t contributing = 0;
  for (const auto& layer : model.layers) {
    for (const auto& classifier : layer.models) {
      const auto* gbdt = dynamic_cast<const GbdtModel*>(classifier.get());
      if (!gbdt) continue;
      if (gbdt->feature_count() != schema.size()) {
        throw EvalError("schema has " + std::to_string(schema.size()) + " entries, model has " +
                        std::to_string(gbdt->feature_count()) + " features");
      }
      FeatureImportance importance;
      try {
        importance = feature_importance(*gbdt);
      } catch (const ModelError&) {
        continue;  // no splits, nothing to attribute
      }
      for (std::size_t f = 0; f < gain.size(); ++f) gain[f] += importance.gain_fraction[f];
      ++contributing;
    }
  }
  if (contributing == 0) throw EvalError("no boosted-tree model with splits to attribute");
  std::map<std::string, double> by_type = {{"context", 0.0}, {"motion", 0.0}, {"static_proxy", 0.0}};
  double total = 0.0;
  for (std::size_t f = 0; f < gain.size(); ++f) {
    by_type[feature_kind_name(schema[f])] += gain[f];
    total += gain[f];
  }
  for (auto& [name, value] : by_type) value /= total;
  return by_type;
}

void write_report(const EvalReport& report, std::ostream& out) {
  using text::format_exact;
  out << "per_sample_accuracy = " << format_exact(report.per_sample_accuracy) << '\n';
  out << "per_user_accuracy = " << format_exact(report.per_user_accuracy) << '\n';
  for (const auto& [k, v] : report.top_k_accuracies) out << "top_" << k << "_accuracy = " << format_exact(v) << '\n';
  for (const auto& [count, v] : report.accuracy_by_sample_count) {
    out << "accuracy_at_" << count << "_samples = " << format_exact(v) << "  # "
        << format_exact(report.seconds_per_user(count)) << " s\n";
  }
  out << "users_evaluated = " << report.users_evaluated << '\n';
  out << "users_excluded = " << report.users_excluded << '\n';
  out << "samples_evaluated = " << report.samples_evaluated << '\n';
  for (const auto& [key, v] : report.group_accuracies) {
    out << "group." << key.first << '.' << key.second << " = " << format_exact(v) << "  # n="
        << report.group_sizes.at(key) << '\n';
  }
  for (const auto& [type, v] : report.importance_by_type) out << "importance." << type << " = " << format_exact(v) << '\n';
}

void write_user_outcomes(const EvalReport& report, std::span<const std::string> user_ids, std::ostream& out) {
  out << "user_id,correct,rank,samples,samples_correct\n";
  for (const UserOutcome& o : report.outcomes) {
    out << user_ids[o.user] << ',' << (o.correct ? 1 : 0) << ',' << o.rank << ',' << o.samples << ','
        << o.samples_correct << '\n';
  }
}

}  // namespace motionid
