#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qdroute/error.hpp"
#include "qdroute/preprocess.hpp"

using namespace qdroute;
using namespace qdroute::preprocess;

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Quantile function by bisection on the CDF.
double phi_inv(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Mid-rank ECDF by counting, linear between fit points, clipped.
double oracle_scale(const std::vector<double>& fit, double v) {
  const double n = static_cast<double>(fit.size());
  const double lo = 0.5 / n, hi = 1.0 - 0.5 / n;
  if (std::all_of(fit.begin(), fit.end(), [&](double f) { return f == fit[0]; })) return 0.0;
  auto at = [&](double x) {
    double less = 0, equal = 0;
    for (double f : fit) {
      less += f < x;
      equal += f == x;
    }
    return (less + equal / 2.0) / n;
  };
  double below = -INFINITY, above = INFINITY;
  for (double f : fit) {
    if (f <= v) below = std::max(below, f);
    if (f >= v) above = std::min(above, f);
  }
  double p;
  if (!std::isfinite(below)) p = lo;
  else if (!std::isfinite(above)) p = hi;
  else if (below == above) p = at(v);
  else p = at(below) + (v - below) / (above - below) * (at(above) - at(below));
  return phi_inv(std::clamp(p, lo, hi));
}

double oracle_anova(const std::vector<double>& col, const std::vector<int>& g, int k) {
  std::vector<long double> sum(static_cast<std::size_t>(k)), cnt(static_cast<std::size_t>(k));
  long double total = 0;
  for (std::size_t i = 0; i < col.size(); ++i) {
    sum[static_cast<std::size_t>(g[i])] += col[i];
    cnt[static_cast<std::size_t>(g[i])] += 1;
    total += col[i];
  }
  const long double grand = total / static_cast<long double>(col.size());
  long double ssb = 0, ssw = 0;
  for (int j = 0; j < k; ++j) {
    const long double m = sum[static_cast<std::size_t>(j)] / cnt[static_cast<std::size_t>(j)];
    ssb += cnt[static_cast<std::size_t>(j)] * (m - grand) * (m - grand);
  }
  for (std::size_t i = 0; i < col.size(); ++i) {
    const long double m = sum[static_cast<std::size_t>(g[i])] / cnt[static_cast<std::size_t>(g[i])];
    ssw += (col[i] - m) * (col[i] - m);
  }
  const auto n = static_cast<long double>(col.size());
  return static_cast<double>((ssb / (k - 1)) / (ssw / (n - k)));
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, bool ties) {
  std::normal_distribution<double> d(0.0, 3.0);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = ties ? std::round(d(rng)) : d(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-14));
  for (double p : {1e-10, 0.01, 0.3, 0.77, 0.999}) {
    CHECK(normal_quantile(p) == doctest::Approx(phi_inv(p)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), RangeError);
  CHECK_THROWS_AS(normal_quantile(1.0), RangeError);
}

TEST_CASE("quantile transform: median maps to zero, constant columns to zero") {
  std::mt19937_64 rng(3);
  for (int rows : {2, 5, 8, 33}) {
    Matrix m = random_matrix(rng, rows, 6, false);
    m.col(5).setConstant(4.25);
    const auto s = fit_quantile(m);
    CHECK(s.n_fit == static_cast<std::size_t>(rows));
    CHECK(s.constant[5]);
    CHECK_FALSE(s.constant[0]);
    const auto t = transform(s, m);
    for (int c = 0; c < 5; ++c) {
      std::vector<double> col;
      for (int r = 0; r < rows; ++r) col.push_back(m(r, c));
      std::sort(col.begin(), col.end());
      const double median = rows % 2 ? col[static_cast<std::size_t>(rows / 2)]
                                     : 0.5 * (col[static_cast<std::size_t>(rows / 2 - 1)] +
                                              col[static_cast<std::size_t>(rows / 2)]);
      CHECK(std::abs(s.transform_value(static_cast<std::size_t>(c), median)) < 1e-12);
    }
    for (int r = 0; r < rows; ++r) CHECK(t(r, 5) == 0.0);
  }
}

TEST_CASE("quantile transform of 1..33 is strictly increasing and close to normal") {
  Matrix m(33, 1);
  for (int i = 0; i < 33; ++i) m(i, 0) = 33 - i;  // fit order does not matter
  const auto s = fit_quantile(m);
  std::vector<double> z;
  for (int v = 1; v <= 33; ++v) z.push_back(s.transform_value(0, v));
  for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] > z[i - 1]);

  double ks = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = phi(z[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i + 1) / 33.0),
                   std::abs(f - static_cast<double>(i) / 33.0)});
  }
  CHECK(ks <= 0.1);
  CHECK(ks == doctest::Approx(0.5 / 33.0).epsilon(1e-9));

  // Out of range values clamp to the clip quantiles.
  CHECK(s.transform_value(0, -100.0) == normal_quantile(0.5 / 33.0));
  CHECK(s.transform_value(0, 1e9) == normal_quantile(1.0 - 0.5 / 33.0));
  CHECK(s.transform_value(0, 1.0) == normal_quantile(0.5 / 33.0));
}

TEST_CASE("quantile transform matches a counting oracle, ties included") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> probe(-12.0, 12.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 2 + static_cast<int>(rng() % 40);
    const Matrix m = random_matrix(rng, rows, 3, trial % 2 == 0);
    const auto s = fit_quantile(m);
    for (int c = 0; c < 3; ++c) {
      std::vector<double> fit;
      for (int r = 0; r < rows; ++r) fit.push_back(m(r, c));
      std::vector<double> probes(fit);
      for (int i = 0; i < 20; ++i) probes.push_back(probe(rng));
      std::sort(probes.begin(), probes.end());
      double prev = -INFINITY;
      for (double v : probes) {
        const double got = s.transform_value(static_cast<std::size_t>(c), v);
        CHECK(got == doctest::Approx(oracle_scale(fit, v)).epsilon(1e-9));
        CHECK(got >= prev);
        prev = got;
      }
    }
  }
}

TEST_CASE("quantile transform preserves ranks when applied twice") {
  std::mt19937_64 rng(21);
  const Matrix m = random_matrix(rng, 33, 8, true);
  const Matrix once = transform(fit_quantile(m), m);
  const Matrix twice = transform(fit_quantile(once), once);
  for (int c = 0; c < m.cols(); ++c) {
    for (int a = 0; a < m.rows(); ++a) {
      for (int b = 0; b < m.rows(); ++b) {
        const auto sign = [](double x, double y) { return (x > y) - (x < y); };
        CHECK(sign(m(a, c), m(b, c)) == sign(twice(a, c), twice(b, c)));
      }
    }
  }
  CHECK(transform(fit_quantile(m), m, Execution::Serial) == once);
}

TEST_CASE("quantile scaler errors and text round trip") {
  Matrix one(1, 2);
  one << 1, 2;
  CHECK_THROWS_AS(fit_quantile(one), ValidationError);
  Matrix bad(2, 1);
  bad << 1, NAN;
  CHECK_THROWS_AS(fit_quantile(bad), ValidationError);

  std::mt19937_64 rng(4);
  const Matrix m = random_matrix(rng, 10, 4, true);
  const auto s = fit_quantile(m, {"a", "b.c", "p2.X.mean", "t.dts.std"});
  CHECK_THROWS_AS(transform(s, Matrix(3, 5)), ValidationError);
  CHECK_THROWS_AS(fit_quantile(m, {"a"}), ValidationError);

  std::stringstream buf;
  write_scaler(buf, s);
  const auto back = read_scaler(buf);
  CHECK(back.columns == s.columns);
  CHECK(back.references == s.references);
  CHECK(back.constant == s.constant);
  CHECK(back.n_fit == s.n_fit);
  CHECK(transform(back, m) == transform(s, m));

  std::istringstream wrong_version("qdroute-quantile-scaler 2\ncolumns 0 n_fit 2\n");
  CHECK_THROWS_AS(read_scaler(wrong_version), ValidationError);
  std::istringstream garbage("hello\n");
  CHECK_THROWS_AS(read_scaler(garbage), ValidationError);
  std::istringstream truncated("qdroute-quantile-scaler 1\ncolumns 2 n_fit 2\na\t0\t1\t2\n");
  CHECK_THROWS_AS(read_scaler(truncated), ValidationError);
}

TEST_CASE("anova F: hand cases and sentinels") {
  const std::vector<int> g{0, 0, 1, 1, 2, 2};
  CHECK(anova_f({5, 5, 5, 5, 5, 5}, g, 3) == 0.0);
  CHECK(anova_f({1, 1, 2, 2, 3, 3}, g, 3) == kInfiniteF);
  const std::vector<double> col{1, 2, 2, 3, 5, 6};
  CHECK(anova_f(col, g, 3) == doctest::Approx(oracle_anova(col, g, 3)).epsilon(1e-12));
  CHECK(anova_f(col, g, 3) == doctest::Approx(52.0 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(anova_f({1, 2, 3}, {0, 0, 0}, 2), ValidationError);   // empty group
  CHECK_THROWS_AS(anova_f({1, 2}, {0, 1}, 2), ValidationError);         // n == k
  CHECK_THROWS_AS(anova_f({1, 2, 3}, {0, 0, 0}, 1), ValidationError);   // one group
  CHECK_THROWS_AS(anova_f({1, 2, 3}, {0, 1}, 2), ValidationError);      // length mismatch
}

TEST_CASE("anova F matches a naive oracle and is affine invariant") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> d(0.0, 1.0);
  std::uniform_real_distribution<double> a(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 3);
    const int n = k + 1 + static_cast<int>(rng() % 30);
    std::vector<int> g;
    for (int i = 0; i < n; ++i) g.push_back(i < k ? i : static_cast<int>(rng() % static_cast<unsigned>(k)));
    std::vector<double> col;
    for (int i = 0; i < n; ++i) col.push_back(d(rng) + 0.7 * g[static_cast<std::size_t>(i)]);
    const double f = anova_f(col, g, k);
    CHECK(f >= 0.0);
    CHECK(f == doctest::Approx(oracle_anova(col, g, k)).epsilon(1e-9));

    double scale = a(rng);
    if (std::abs(scale) < 0.1) scale = 0.1;
    const double shift = a(rng) * 100;
    std::vector<double> moved;
    for (double v : col) moved.push_back(scale * v + shift);
    CHECK(anova_f(moved, g, k) == doctest::Approx(f).epsilon(1e-9));
  }
}

TEST_CASE("feature scores: ranking survives per-column affine maps") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(0.5, 20.0);
  Matrix m = random_matrix(rng, 30, 12, false);
  std::vector<std::string> labels, names;
  for (int r = 0; r < 30; ++r) {
    labels.push_back(r % 3 == 0 ? "x" : r % 3 == 1 ? "y" : "z");
    for (int c = 0; c < 12; ++c) m(r, c) += 2.0 * c * (r % 3);
  }
  for (int c = 0; c < 12; ++c) names.push_back("c" + std::to_string(c));
  Matrix moved = m;
  for (int c = 0; c < 12; ++c) {
    moved.col(c) = moved.col(c) * (c % 2 ? -a(rng) : a(rng)) + Vector::Constant(30, a(rng));
  }
  const auto s1 = score_features(m, names, labels);
  const auto s2 = score_features(moved, names, labels, Execution::Serial);
  CHECK(select_k_best(s1, 12) == select_k_best(s2, 12));
  auto top = select_k_best(s1, 3);
  std::sort(top.begin(), top.end());
  CHECK(top == std::vector<std::string>{"c10", "c11", "c9"});
  CHECK_THROWS_AS(score_features(m, names, {"x"}), ValidationError);
}

TEST_CASE("select_k_best: infinity first, ties by column order") {
  const std::vector<FeatureScore> s{{"a", 5}, {"b", kInfiniteF}, {"c", 5}, {"d", 1}};
  CHECK(select_k_best(s, 2) == std::vector<std::string>{"b", "a"});
  CHECK(select_k_best(s, 4) == std::vector<std::string>{"b", "a", "c", "d"});
  CHECK(select_k_best_indices(s, 3) == std::vector<std::size_t>{1, 0, 2});
  CHECK_THROWS_AS(select_k_best(s, 0), ValidationError);
  CHECK_THROWS_AS(select_k_best(s, 5), ValidationError);

  const std::vector<FeatureScore> flat{{"p", 0}, {"q", 0}, {"r", 0}};
  CHECK(select_k_best(flat, 3) == std::vector<std::string>{"p", "q", "r"});
}

TEST_CASE("label encoding and column extraction") {
  int k = 0;
  CHECK(encode_labels({"6b+", "5c+", "6b+", "6a+"}, &k) == std::vector<int>{0, 1, 0, 2});
  CHECK(k == 3);
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const Matrix t = take_columns(m, {2, 0});
  CHECK(t(0, 0) == 3);
  CHECK(t(1, 1) == 4);
  CHECK(t.cols() == 2);
}
