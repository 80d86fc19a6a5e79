#pragma once

#include <array>
#include <span>
#include <string_view>

namespace qdroute::features {

/// Order of the per-series statistics inside every feature sub-vector.
inline constexpr std::array<std::string_view, 13> kStatisticNames = {
    "mean", "min", "max", "var", "std", "rms", "p5",
    "p25",  "p75", "p95", "kurtosis", "skew", "n_peaks"};

/// Conventions: population variance, Fisher (excess) kurtosis and
/// Fisher-Pearson skew, linear-interpolation percentiles. A constant series
/// has variance, skew and kurtosis all exactly 0.
struct Statistics {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double variance = 0.0;
  double std = 0.0;
  double rms = 0.0;
  double p5 = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
  double kurtosis = 0.0;
  double skew = 0.0;
  int n_peaks = 0;

  std::array<double, 13> values() const {
    return {mean, min, max, variance, std, rms, p5, p25, p75, p95, kurtosis, skew,
            static_cast<double>(n_peaks)};
  }
};

/// 2 x the count resolution at the default +-2 g / 8-bit setting.
inline constexpr double kDefaultPeakProminence = 2.0 * 2.0 / 127.0;

double magnitude(double x, double y, double z);

/// Linear interpolation between closest ranks; `sorted` must be ascending
/// and non-empty, p in [0, 100].
double percentile(std::span<const double> sorted, double p);

/// Strict local maxima (s[k-1] < s[k] > s[k+1]) whose topographic
/// prominence is at least min_prominence.
int count_peaks(std::span<const double> series, double min_prominence);

/// Throws ValidationError for an empty series.
Statistics stat_features(std::span<const double> series,
                         double peak_prominence = kDefaultPeakProminence);

struct Correlations {
  double xy = 0.0;
  double xz = 0.0;
  double yz = 0.0;
};

/// Pearson r; 0 when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Throws ValidationError when the series differ in length or have fewer
/// than 2 samples.
Correlations cross_correlations(std::span<const double> x, std::span<const double> y,
                                std::span<const double> z);

}  // namespace qdroute::features
