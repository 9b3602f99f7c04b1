#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "paretoscope/error.hpp"
#include "paretoscope/forest.hpp"

using namespace paretoscope;

namespace {

struct Grid3 {
  std::vector<std::vector<double>> train_x, test_x;
  std::vector<double> train_y, test_y;
};

/// f(x) = x0 + x1 + x2 on {0..9}^3, every fifth point held out.
Grid3 sum_grid() {
  Grid3 g;
  int k = 0;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      for (int c = 0; c < 10; ++c, ++k) {
        std::vector<double> x{double(a), double(b), double(c)};
        const double y = a + b + c;
        if (k % 5 == 0) {
          g.test_x.push_back(x);
          g.test_y.push_back(y);
        } else {
          g.train_x.push_back(x);
          g.train_y.push_back(y);
        }
      }
  return g;
}

double rmse(const Forest& f, const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double e = f.predict(X[i]).mean - y[i];
    s += e * e;
  }
  return std::sqrt(s / X.size());
}

}  // namespace

TEST_CASE("constant targets give exact, certain predictions") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    X.push_back({double(i), double(i % 3)});
    y.push_back(7.0);
  }
  const Forest f = fit_forest(X, y, {}, RandomStream(1));
  for (const auto& t : f.trees()) {
    for (const auto& n : t.nodes())
      if (n.is_leaf()) CHECK(n.value == 7.0);
  }
  for (double probe : {-5.0, 0.0, 13.5, 100.0}) {
    const auto p = f.predict(std::vector<double>{probe, 1.0});
    CHECK(p.mean == 7.0);
    CHECK(p.spread == 0.0);
  }
}

TEST_CASE("single sample gives single-leaf trees") {
  const Forest f = fit_forest({{1.0, 2.0}}, std::vector<double>{3.5}, {}, RandomStream(2));
  for (const auto& t : f.trees()) CHECK(t.nodes().size() == 1);
  CHECK(f.predict(std::vector<double>{9.0, 9.0}).mean == 3.5);
}

TEST_CASE("fully grown trees memorize y = x") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i <= 100; ++i) {
    X.push_back({i / 100.0});
    y.push_back(i / 100.0);
  }
  ForestParams p;
  p.bootstrap = false;
  p.min_leaf = 1;
  p.tree_count = 5;
  const Forest f = fit_forest(X, y, p, RandomStream(3));
  for (std::size_t i = 0; i < X.size(); ++i) CHECK(std::abs(f.predict(X[i]).mean - y[i]) < 1e-9);
}

TEST_CASE("thresholds are midpoints and leaves respect min_leaf") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    X.push_back({double(i * 2)});
    y.push_back(std::sin(i * 0.3));
  }
  ForestParams p;
  p.min_leaf = 3;
  p.bootstrap = false;  // with one feature and no resampling, every node holds a contiguous run of grid values
  const Forest f = fit_forest(X, y, p, RandomStream(4));
  for (const auto& t : f.trees()) {
    for (const auto& n : t.nodes()) {
      if (n.is_leaf()) continue;
      CHECK(t.nodes()[n.left].count >= 3);
      CHECK(t.nodes()[n.right].count >= 3);
      CHECK(std::fmod(n.threshold, 2.0) == 1.0);  // between consecutive even values
    }
  }
}

TEST_CASE("max_depth caps tree depth") {
  const auto g = sum_grid();
  ForestParams p;
  p.max_depth = 3;
  p.tree_count = 10;
  const Forest f = fit_forest(g.train_x, g.train_y, p, RandomStream(5));
  for (const auto& t : f.trees()) CHECK(t.depth() <= 3);
}

TEST_CASE("predictions stay inside the training target range") {
  const auto g = sum_grid();
  ForestParams p;
  p.tree_count = 20;
  const Forest f = fit_forest(g.train_x, g.train_y, p, RandomStream(6));
  const auto [lo, hi] = std::minmax_element(g.train_y.begin(), g.train_y.end());
  for (double a = -3; a <= 12; a += 1.5)
    for (double b = -3; b <= 12; b += 2.5) {
      const auto pr = f.predict(std::vector<double>{a, b, 4.0});
      CHECK(pr.mean >= *lo);
      CHECK(pr.mean <= *hi);
      CHECK(pr.spread >= 0.0);
    }
}

TEST_CASE("held-out RMSE beats the global-mean baseline on sum(x)") {
  const auto g = sum_grid();
  const Forest f = fit_forest(g.train_x, g.train_y, {}, RandomStream(7));
  double mean = 0.0;
  for (double v : g.train_y) mean += v;
  mean /= g.train_y.size();
  double base = 0.0;
  for (double v : g.test_y) base += (v - mean) * (v - mean);
  base = std::sqrt(base / g.test_y.size());
  CHECK(rmse(f, g.test_x, g.test_y) < base);
}

TEST_CASE("one-tree forest has zero spread") {
  const auto g = sum_grid();
  ForestParams p;
  p.tree_count = 1;
  const Forest f = fit_forest(g.train_x, g.train_y, p, RandomStream(8));
  CHECK(f.predict(std::vector<double>{1.5, 2.5, 3.5}).spread == 0.0);
}

TEST_CASE("fit is deterministic and independent of thread count") {
  const auto g = sum_grid();
  ForestParams p;
  p.tree_count = 24;
  const Forest a = fit_forest(g.train_x, g.train_y, p, RandomStream(9), 1);
  const Forest b = fit_forest(g.train_x, g.train_y, p, RandomStream(9), 4);
  const Forest c = fit_forest(g.train_x, g.train_y, p, RandomStream(10), 1);
  bool any_difference = false;
  for (const auto& x : g.test_x) {
    const auto pa = a.predict(x), pb = b.predict(x);
    CHECK(pa.mean == pb.mean);
    CHECK(pa.spread == pb.spread);
    any_difference = any_difference || c.predict(x).mean != pa.mean;
  }
  CHECK(any_difference);
}

TEST_CASE("bagging beats a single tree on noisy linear data (median of 11 seeds)") {
  std::vector<double> forest_rmse, tree_rmse;
  for (std::uint64_t seed = 0; seed < 11; ++seed) {
    RandomStream noise(1000 + seed);
    std::vector<std::vector<double>> X, Xt;
    std::vector<double> y, yt;
    for (int i = 0; i < 200; ++i) {
      const double a = noise.uniform01() * 10, b = noise.uniform01() * 10;
      X.push_back({a, b});
      y.push_back(2 * a - b + (noise.uniform01() - 0.5) * 6.0);
    }
    for (int i = 0; i < 200; ++i) {
      const double a = noise.uniform01() * 10, b = noise.uniform01() * 10;
      Xt.push_back({a, b});
      yt.push_back(2 * a - b);
    }
    ForestParams many;
    ForestParams one;
    one.tree_count = 1;
    forest_rmse.push_back(rmse(fit_forest(X, y, many, RandomStream(seed)), Xt, yt));
    tree_rmse.push_back(rmse(fit_forest(X, y, one, RandomStream(seed)), Xt, yt));
  }
  std::sort(forest_rmse.begin(), forest_rmse.end());
  std::sort(tree_rmse.begin(), tree_rmse.end());
  CHECK(forest_rmse[5] <= tree_rmse[5]);
}

TEST_CASE("fit rejects bad input") {
  CHECK_THROWS_AS(fit_forest({}, std::vector<double>{}, {}, RandomStream(1)), Error);
  CHECK_THROWS_AS(fit_forest({{1.0}, {2.0}}, std::vector<double>{1.0}, {}, RandomStream(1)), Error);
  CHECK_THROWS_AS(fit_forest({{1.0}, {2.0, 3.0}}, std::vector<double>{1.0, 2.0}, {}, RandomStream(1)), Error);
  CHECK_THROWS_AS(fit_forest({{NAN}}, std::vector<double>{1.0}, {}, RandomStream(1)), Error);
  CHECK_THROWS_AS(fit_forest({{1.0}}, std::vector<double>{INFINITY}, {}, RandomStream(1)), Error);
  ForestParams bad;
  bad.feature_fraction = 0.0;
  CHECK_THROWS_AS(fit_forest({{1.0}}, std::vector<double>{1.0}, bad, RandomStream(1)), Error);
  const Forest f = fit_forest({{1.0}}, std::vector<double>{1.0}, {}, RandomStream(1));
  CHECK_THROWS_AS(f.predict(std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("features per split") {
  ForestParams p;
  CHECK(p.features_per_split(1) == 1);
  CHECK(p.features_per_split(3) == 1);
  CHECK(p.features_per_split(4) == 2);
  CHECK(p.features_per_split(6) == 2);
  p.feature_fraction = 1.0;
  CHECK(p.features_per_split(6) == 6);
}

TEST_CASE("forest JSON round trip preserves predictions") {
  const auto g = sum_grid();
  ForestParams p;
  p.tree_count = 8;
  p.max_depth = 6;
  const Forest f = fit_forest(g.train_x, g.train_y, p, RandomStream(11));
  const auto doc = to_json(f);
  CHECK(doc.at("version") == 1);
  const Forest back = forest_from_json(nlohmann::json::parse(doc.dump()));
  for (const auto& x : g.test_x) {
    CHECK(back.predict(x).mean == f.predict(x).mean);
    CHECK(back.predict(x).spread == f.predict(x).spread);
  }
  auto wrong = doc;
  wrong["version"] = 99;
  CHECK_THROWS_AS(forest_from_json(wrong), Error);
}
