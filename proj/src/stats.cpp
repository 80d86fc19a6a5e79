#include "qdroute/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "qdroute/error.hpp"

namespace qdroute::features {

double magnitude(double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); }

double percentile(std::span<const double> sorted, double p) {
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

int count_peaks(std::span<const double> s, double min_prominence) {
  const std::size_t n = s.size();
  int count = 0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (!(s[k - 1] < s[k] && s[k] > s[k + 1])) continue;
    double left_min = s[k];
    for (std::size_t j = k; j-- > 0;) {
      if (s[j] > s[k]) break;
      left_min = std::min(left_min, s[j]);
    }
    double right_min = s[k];
    for (std::size_t j = k + 1; j < n; ++j) {
      if (s[j] > s[k]) break;
      right_min = std::min(right_min, s[j]);
    }
    if (s[k] - std::max(left_min, right_min) >= min_prominence) ++count;
  }
  return count;
}

Statistics stat_features(std::span<const double> series, double peak_prominence) {
  if (series.empty()) throw ValidationError("stat_features: empty series");
  const auto n = static_cast<double>(series.size());
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());

  Statistics st;
  st.min = sorted.front();
  st.max = sorted.back();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : series) {
    sum += v;
    sum_sq += v * v;
  }
  st.mean = sum / n;
  st.rms = std::sqrt(sum_sq / n);
  st.p5 = percentile(sorted, 5.0);
  st.p25 = percentile(sorted, 25.0);
  st.p75 = percentile(sorted, 75.0);
  st.p95 = percentile(sorted, 95.0);
  st.n_peaks = count_peaks(series, peak_prominence);
  if (st.min == st.max) {
    st.mean = st.min;
    return st;  // degenerate: variance, skew and kurtosis stay 0
  }
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : series) {
    const double d = v - st.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  st.variance = m2;
  st.std = std::sqrt(m2);
  st.skew = m3 / std::pow(m2, 1.5);
  st.kurtosis = m4 / (m2 * m2) - 3.0;
  return st;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  if (*amin == *amax || *bmin == *bmax) return 0.0;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Correlations cross_correlations(std::span<const double> x, std::span<const double> y,
                                std::span<const double> z) {
  if (x.size() != y.size() || x.size() != z.size()) {
    throw ValidationError("cross_correlations: series lengths differ");
  }
  if (x.size() < 2) throw ValidationError("cross_correlations: need at least 2 samples");
  return {pearson(x, y), pearson(x, z), pearson(y, z)};
}

}  // namespace qdroute::features
