#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "motionid/gbdt.hpp"
#include "motionid/logistic.hpp"
#include "motionid/rng.hpp"

using namespace motionid;

namespace {

struct Blobs {
  Matrix rows;
  std::vector<ClassLabel> labels;
};

Blobs blobs(std::size_t classes, std::size_t per_class, std::size_t dims, double spread,
            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> centers(classes, std::vector<double>(dims));
  for (auto& c : centers) {
    for (double& v : c) v = rng.normal(0.0, 3.0);
  }
  Blobs b;
  b.rows = Matrix(classes * per_class, dims);
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = k * per_class + i;
      for (std::size_t d = 0; d < dims; ++d) b.rows(r, d) = centers[k][d] + rng.normal(0.0, spread);
      b.labels.push_back(static_cast<ClassLabel>(k * 3 + 1));
    }
  }
  return b;
}

double accuracy(const Classifier& model, const Blobs& data) {
  const Matrix p = model.predict_proba(data.rows);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    const auto row = p.row(r);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    hits += model.classes()[best] == data.labels[r];
  }
  return static_cast<double>(hits) / static_cast<double>(p.rows());
}

GbdtConfig stump_config() {
  GbdtConfig c;
  c.n_estimators = 1;
  c.num_leaves = 2;
  c.min_data_in_leaf = 1;
  c.min_child_weight = 0.0;
  c.min_split_gain = 0.0;
  c.reg_alpha = 0.0;
  c.reg_lambda = 1.0;
  c.colsample_bytree = 1.0;
  return c;
}

double soft(double g, double alpha) {
  return g > alpha ? g - alpha : g < -alpha ? g + alpha : 0.0;
}

}  // namespace

TEST_CASE("bin edges sit midway between distinct values") {
  Matrix m(6, 2);
  const double xs[] = {1, 1, 2, 4, 4, 8};
  for (std::size_t r = 0; r < 6; ++r) {
    m(r, 0) = xs[r];
    m(r, 1) = 5.0;
  }
  const auto edges = compute_bin_edges(m, 63);
  CHECK(edges[0].edges == std::vector<double>{1.5, 3.0, 6.0});
  CHECK(edges[1].edges.empty());
  CHECK(edges[0].bin(1.5) == 0);
  CHECK(edges[0].bin(1.5000001) == 1);
  CHECK(edges[0].bin(100) == 3);

  Matrix wide(1000, 1);
  for (std::size_t r = 0; r < 1000; ++r) wide(r, 0) = static_cast<double>(r);
  const auto q = compute_bin_edges(wide, 10);
  CHECK(q[0].bin_count() == 10);
  CHECK(std::is_sorted(q[0].edges.begin(), q[0].edges.end()));
}

TEST_CASE("a single stump matches hand-computed leaves") {
  Matrix x(40, 1);
  std::vector<ClassLabel> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = static_cast<double>(i);
    y[i] = i < 20 ? 0 : 1;
  }
  for (double alpha : {0.0, 2.0}) {
    GbdtConfig c = stump_config();
    c.reg_alpha = alpha;
    const GbdtModel m = fit_gbdt(x, y, c);
    const Tree& t = m.trees()[0][0];
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].threshold == 19.5);
    // Class 0 rows carry g = -0.5, h = 0.25 on the left; mirrored on the right.
    const double left = -soft(-10.0, alpha) / (5.0 + 1.0) * 0.1;
    CHECK(t.nodes[1].value == doctest::Approx(left).epsilon(1e-12));
    CHECK(t.nodes[2].value == doctest::Approx(-left).epsilon(1e-12));
    const double gain = 2 * soft(10.0, alpha) * soft(10.0, alpha) / 6.0;
    CHECK(t.nodes[0].gain == doctest::Approx(gain).epsilon(1e-12));
    CHECK(m.trees()[1][0].nodes[1].value == doctest::Approx(-left).epsilon(1e-12));
  }
}

TEST_CASE("root split matches a brute-force search") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 60 + rng.below(60), dims = 4;
    Matrix x(n, dims);
    std::vector<ClassLabel> y(n);
    for (std::size_t r = 0; r < n; ++r) {
      y[r] = static_cast<ClassLabel>(rng.below(3));
      for (std::size_t d = 0; d < dims; ++d) x(r, d) = rng.normal(0.3 * y[r] * static_cast<double>(d), 1.0);
    }
    GbdtConfig c = stump_config();
    c.min_data_in_leaf = 5;
    c.reg_alpha = 0.1;
    c.max_bin = 16;
    const GbdtModel m = fit_gbdt(x, y, c);
    const auto edges = compute_bin_edges(x, c.max_bin);

    // First tree of class 0: uniform start, p = 1/3.
    std::vector<double> g(n), h(n, (1.0 / 3.0) * (2.0 / 3.0));
    double G = 0, H = 0;
    for (std::size_t r = 0; r < n; ++r) {
      g[r] = 1.0 / 3.0 - (y[r] == 0 ? 1.0 : 0.0);
      G += g[r];
      H += h[r];
    }
    auto score = [&](double gs, double hs) {
      const double t = soft(gs, c.reg_alpha);
      return t * t / (hs + c.reg_lambda);
    };
    double best = 0.0;
    int best_feature = -1;
    for (std::size_t d = 0; d < dims; ++d) {
      for (double edge : edges[d].edges) {
        double gl = 0, hl = 0;
        std::size_t nl = 0;
        for (std::size_t r = 0; r < n; ++r) {
          if (x(r, d) <= edge) {
            gl += g[r];
            hl += h[r];
            ++nl;
          }
        }
        if (nl < 5 || n - nl < 5) continue;
        const double gain = score(gl, hl) + score(G - gl, H - hl) - score(G, H);
        if (gain > best + 1e-12) {
          best = gain;
          best_feature = static_cast<int>(d);
        }
      }
    }
    const Tree& t = m.trees()[0][0];
    if (best_feature < 0) {
      CHECK(t.nodes.size() == 1);
      continue;
    }
    CHECK(t.nodes[0].feature == best_feature);
    CHECK(t.nodes[0].gain == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("separable blobs are learned and the loss never rises") {
  const Blobs data = blobs(10, 100, 50, 1.0, 4);
  GbdtConfig c;
  c.n_estimators = 30;
  const GbdtModel m = fit_gbdt(data.rows, data.labels, c);
  CHECK(accuracy(m, data) >= 0.99);
  const auto& loss = m.training_loss();
  REQUIRE(loss.size() == 31);
  CHECK(loss[0] == doctest::Approx(std::log(10.0)));
  for (std::size_t i = 1; i < loss.size(); ++i) CHECK(loss[i] <= loss[i - 1] + 1e-9);

  const Matrix p = m.predict_proba(data.rows);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double sum = 0.0;
    for (double v : p.row(r)) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("save and load reproduce the model exactly") {
  const Blobs data = blobs(4, 60, 8, 1.5, 5);
  GbdtConfig c;
  c.n_estimators = 15;
  c.goss_enabled = true;
  c.max_depth = 3;
  c.seed = 17;
  const GbdtModel m = fit_gbdt(data.rows, data.labels, c);
  std::stringstream io;
  m.save(io);
  const std::string text = io.str();
  const GbdtModel back = GbdtModel::load(io);
  CHECK(back == m);
  CHECK(back.predict_proba(data.rows) == m.predict_proba(data.rows));
  std::stringstream again;
  back.save(again);
  CHECK(again.str() == text);

  std::istringstream sniff(text);
  const auto any = load_classifier(sniff);
  CHECK(any->predict_proba(data.rows) == m.predict_proba(data.rows));

  std::istringstream broken(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(GbdtModel::load(broken), ModelError);
}

TEST_CASE("training is deterministic per seed") {
  const Blobs data = blobs(3, 80, 10, 2.0, 6);
  GbdtConfig c;
  c.n_estimators = 10;
  c.goss_enabled = true;
  c.seed = 1;
  const GbdtModel a = fit_gbdt(data.rows, data.labels, c);
  CHECK(fit_gbdt(data.rows, data.labels, c) == a);
  c.seed = 2;
  CHECK_FALSE(fit_gbdt(data.rows, data.labels, c) == a);
}

TEST_CASE("depth and leaf limits hold") {
  const Blobs data = blobs(3, 100, 6, 3.0, 7);
  GbdtConfig c;
  c.n_estimators = 5;
  c.num_leaves = 6;
  c.min_data_in_leaf = 5;
  c.min_child_weight = 0.0;
  c.min_split_gain = 0.0;
  const GbdtModel wide = fit_gbdt(data.rows, data.labels, c);
  for (const auto& per_class : wide.trees()) {
    for (const Tree& t : per_class) CHECK(t.leaf_count() <= 6);
  }
  c.max_depth = 1;
  const GbdtModel shallow = fit_gbdt(data.rows, data.labels, c);
  for (const auto& per_class : shallow.trees()) {
    for (const Tree& t : per_class) CHECK(t.leaf_count() <= 2);
  }
}

TEST_CASE("feature importance fractions sum to one") {
  const Blobs data = blobs(5, 50, 12, 1.0, 8);
  GbdtConfig c;
  c.n_estimators = 10;
  const GbdtModel m = fit_gbdt(data.rows, data.labels, c);
  const auto imp = feature_importance(m);
  double splits = 0, gains = 0;
  for (double v : imp.split_fraction) splits += v;
  for (double v : imp.gain_fraction) gains += v;
  CHECK(std::abs(splits - 1.0) < 1e-9);
  CHECK(std::abs(gains - 1.0) < 1e-9);
}

TEST_CASE("degenerate inputs") {
  Matrix x(30, 2, 1.0);
  const std::vector<ClassLabel> same(30, 4);
  const GbdtModel constant = fit_gbdt(x, same, {});
  CHECK(constant.classes() == std::vector<ClassLabel>{4});
  CHECK(constant.predict_proba(x)(0, 0) == 1.0);
  CHECK_THROWS_AS(feature_importance(constant), ModelError);

  std::vector<ClassLabel> two(30, 0);
  two[0] = 1;
  CHECK_THROWS_AS(fit_gbdt(Matrix(5, 2), std::vector<ClassLabel>{0, 1, 0, 1, 0}, {}), ModelError);
  CHECK_THROWS_AS(fit_gbdt(x, std::vector<ClassLabel>(3, 0), {}), ModelError);
  x(3, 1) = std::nan("");
  CHECK_THROWS_AS(fit_gbdt(x, two, {}), ModelError);

  GbdtConfig bad;
  bad.colsample_bytree = 0.0;
  CHECK_THROWS_AS(bad.validate(), ModelError);
  bad = {};
  bad.max_bin = 300;
  CHECK_THROWS_AS(bad.validate(), ModelError);

  const Blobs data = blobs(2, 40, 3, 1.0, 9);
  GbdtConfig c;
  c.n_estimators = 2;
  const GbdtModel m = fit_gbdt(data.rows, data.labels, c);
  CHECK_THROWS_WITH(m.predict_proba(Matrix(1, 4)),
                    "boosted_trees: dimension mismatch: 4 columns, model has 3");
}

TEST_CASE("logistic oracle fits separable data") {
  const Blobs data = blobs(10, 100, 50, 1.0, 10);
  const LogisticModel m = fit_logistic_baseline(data.rows, data.labels);
  CHECK(accuracy(m, data) >= 0.99);
  std::stringstream io;
  m.save(io);
  CHECK(io.str().rfind("LOGIT1", 0) == 0);
  const auto back = load_classifier(io);
  CHECK(back->predict_proba(data.rows) == m.predict_proba(data.rows));
}

TEST_CASE("softmax is shift invariant and stable") {
  std::vector<double> a = {1000.0, 1001.0, 999.0};
  std::vector<double> b = {0.0, 1.0, -1.0};
  softmax_in_place(a);
  softmax_in_place(b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}
