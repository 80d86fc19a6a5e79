#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "qdroute/matrix.hpp"
#include "qdroute/parallel.hpp"

namespace qdroute::preprocess {

/// Maps each column through its fitted empirical CDF and then the standard
/// normal quantile function.
struct QuantileScaler {
  static constexpr int kFormatVersion = 1;

  std::vector<std::string> columns;
  std::vector<std::vector<double>> references;  ///< sorted fit values per column
  std::vector<bool> constant;                   ///< column had a single distinct value
  std::size_t n_fit = 0;

  double lower_clip() const { return 0.5 / static_cast<double>(n_fit); }
  double upper_clip() const { return 1.0 - 0.5 / static_cast<double>(n_fit); }

  /// Mid-rank ECDF with linear interpolation between distinct fit values,
  /// clamped to [lower_clip, upper_clip].
  double ecdf(std::size_t column, double v) const;
  double transform_value(std::size_t column, double v) const;
};

/// Throws ValidationError for fewer than 2 rows.
QuantileScaler fit_quantile(const Matrix& data, std::vector<std::string> columns = {});

/// Throws ValidationError when the column count differs from the fit.
Matrix transform(const QuantileScaler& scaler, const Matrix& data,
                 Execution exec = Execution::Parallel);

/// Versioned text format: "qdroute-quantile-scaler 1", then one line per
/// column with its name, constant flag and sorted reference values.
void write_scaler(std::ostream& out, const QuantileScaler& scaler);
QuantileScaler read_scaler(std::istream& in);

/// Standard normal quantile function.
double normal_quantile(double p);

inline constexpr double kInfiniteF = std::numeric_limits<double>::infinity();

/// One-way ANOVA F with (k-1, n-k) degrees of freedom. Groups are ids
/// 0..n_groups-1. Zero within-group variance yields +inf when the group
/// means differ and 0 when they are equal. Throws ValidationError for an
/// empty group, fewer than 2 groups, or n <= n_groups.
double anova_f(const std::vector<double>& column, const std::vector<int>& groups, int n_groups);

/// Encodes string labels as group ids in order of first appearance.
std::vector<int> encode_labels(const std::vector<std::string>& labels, int* n_groups = nullptr);

struct FeatureScore {
  std::string column;
  double f = 0.0;
};

std::vector<FeatureScore> score_features(const Matrix& data,
                                         const std::vector<std::string>& columns,
                                         const std::vector<std::string>& labels,
                                         Execution exec = Execution::Parallel);

/// Indices of the k highest scores; +inf ranks above every finite value and
/// ties keep the original column order. Throws ValidationError unless
/// 1 <= k <= scores.size().
std::vector<std::size_t> select_k_best_indices(const std::vector<FeatureScore>& scores,
                                               std::size_t k);
std::vector<std::string> select_k_best(const std::vector<FeatureScore>& scores, std::size_t k);

/// Columns of `data` at `indices`, in that order.
Matrix take_columns(const Matrix& data, const std::vector<std::size_t>& indices);

}  // namespace qdroute::preprocess
