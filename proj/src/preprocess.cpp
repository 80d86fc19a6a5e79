#include "qdroute/preprocess.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qdroute/error.hpp"

namespace qdroute::preprocess {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw RangeError("normal_quantile: p must be in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double QuantileScaler::ecdf(std::size_t column, double v) const {
  const auto& ref = references.at(column);
  const double lo = lower_clip();
  const double hi = upper_clip();
  if (v < ref.front()) return lo;
  if (v > ref.back()) return hi;
  const auto n = static_cast<double>(ref.size());
  // Average 1-based rank of the tied run [first, last) minus one half, over n.
  auto mid_rank = [&](double x) {
    const auto first = std::lower_bound(ref.begin(), ref.end(), x) - ref.begin();
    const auto last = std::upper_bound(ref.begin(), ref.end(), x) - ref.begin();
    return (static_cast<double>(first + last) / 2.0) / n;
  };
  const auto upper = std::upper_bound(ref.begin(), ref.end(), v);
  const double left = *(upper - 1);
  const double f_left = mid_rank(left);
  if (left == v) return std::clamp(f_left, lo, hi);
  const double right = *upper;
  const double f_right = mid_rank(right);
  const double w = (v - left) / (right - left);
  return std::clamp(f_left + w * (f_right - f_left), lo, hi);
}

double QuantileScaler::transform_value(std::size_t column, double v) const {
  if (constant.at(column)) return 0.0;
  return normal_quantile(ecdf(column, v));
}

QuantileScaler fit_quantile(const Matrix& data, std::vector<std::string> columns) {
  if (data.rows() < 2) throw ValidationError("fit_quantile: need at least 2 rows");
  if (columns.empty()) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) columns.push_back("c" + std::to_string(c));
  }
  if (static_cast<Eigen::Index>(columns.size()) != data.cols()) {
    throw ValidationError("fit_quantile: column names do not match the data");
  }
  QuantileScaler s;
  s.columns = std::move(columns);
  s.n_fit = static_cast<std::size_t>(data.rows());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    std::vector<double> ref(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index r = 0; r < data.rows(); ++r) ref[static_cast<std::size_t>(r)] = data(r, c);
    if (std::any_of(ref.begin(), ref.end(), [](double v) { return !std::isfinite(v); })) {
      throw ValidationError("fit_quantile: non-finite value in column " + s.columns[static_cast<std::size_t>(c)]);
    }
    std::sort(ref.begin(), ref.end());
    s.constant.push_back(ref.front() == ref.back());
    s.references.push_back(std::move(ref));
  }
  return s;
}

Matrix transform(const QuantileScaler& scaler, const Matrix& data, Execution exec) {
  if (static_cast<std::size_t>(data.cols()) != scaler.references.size()) {
    throw ValidationError("transform: data has " + std::to_string(data.cols()) +
                          " columns, scaler was fit on " +
                          std::to_string(scaler.references.size()));
  }
  Matrix out(data.rows(), data.cols());
  parallel_for(static_cast<std::size_t>(data.cols()), exec, [&](std::size_t c) {
    const auto col = static_cast<Eigen::Index>(c);
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      out(r, col) = scaler.transform_value(c, data(r, col));
    }
  });
  return out;
}

void write_scaler(std::ostream& out, const QuantileScaler& s) {
  out << "qdroute-quantile-scaler " << QuantileScaler::kFormatVersion << '\n';
  out << "columns " << s.references.size() << " n_fit " << s.n_fit << '\n';
  char buf[64];
  for (std::size_t c = 0; c < s.references.size(); ++c) {
    out << s.columns[c] << '\t' << (s.constant[c] ? 1 : 0);
    for (double v : s.references[c]) {
      std::snprintf(buf, sizeof buf, "\t%.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

QuantileScaler read_scaler(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "qdroute-quantile-scaler") {
    throw ValidationError("scaler: not a qdroute quantile scaler file");
  }
  if (version != QuantileScaler::kFormatVersion) {
    throw ValidationError("scaler: unsupported format version " + std::to_string(version));
  }
  std::string key1, key2;
  std::size_t ncol = 0;
  QuantileScaler s;
  if (!(in >> key1 >> ncol >> key2 >> s.n_fit) || key1 != "columns" || key2 != "n_fit") {
    throw ValidationError("scaler: bad header");
  }
  std::string line;
  std::getline(in, line);
  for (std::size_t c = 0; c < ncol; ++c) {
    if (!std::getline(in, line)) throw ValidationError("scaler: truncated file");
    std::istringstream ss(line);
    std::string name;
    int constant = 0;
    if (!std::getline(ss, name, '\t') || !(ss >> constant)) {
      throw ValidationError("scaler: bad column line " + std::to_string(c + 1));
    }
    std::vector<double> ref;
    std::string tok;
    while (ss >> tok) ref.push_back(std::stod(tok));
    if (ref.size() != s.n_fit || !std::is_sorted(ref.begin(), ref.end())) {
      throw ValidationError("scaler: column '" + name + "' has bad reference values");
    }
    s.columns.push_back(name);
    s.constant.push_back(constant != 0);
    s.references.push_back(std::move(ref));
  }
  return s;
}

double anova_f(const std::vector<double>& column, const std::vector<int>& groups, int n_groups) {
  if (column.size() != groups.size()) throw ValidationError("anova_f: labels do not match column");
  if (n_groups < 2) throw ValidationError("anova_f: need at least 2 groups");
  const auto n = column.size();
  if (n <= static_cast<std::size_t>(n_groups)) {
    throw ValidationError("anova_f: need more observations than groups");
  }
  const auto k = static_cast<std::size_t>(n_groups);
  std::vector<std::vector<double>> members(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (groups[i] < 0 || groups[i] >= n_groups) throw ValidationError("anova_f: group id out of range");
    members[static_cast<std::size_t>(groups[i])].push_back(column[i]);
  }
  for (std::size_t g = 0; g < k; ++g) {
    if (members[g].empty()) throw ValidationError("anova_f: group " + std::to_string(g) + " is empty");
  }

  double grand = 0.0;
  for (double v : column) grand += v;
  grand /= static_cast<double>(n);

  double ssb = 0.0;
  double ssw = 0.0;
  bool all_constant = true;
  for (const auto& m : members) {
    const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    double mean = 0.0;
    for (double v : m) mean += v;
    mean /= static_cast<double>(m.size());
    if (*lo == *hi) {
      mean = *lo;
    } else {
      all_constant = false;
      for (double v : m) ssw += (v - mean) * (v - mean);
    }
    ssb += static_cast<double>(m.size()) * (mean - grand) * (mean - grand);
  }
  if (all_constant) {
    for (const auto& m : members) {
      if (m.front() != members.front().front()) return kInfiniteF;
    }
    return 0.0;
  }
  const double between = ssb / static_cast<double>(k - 1);
  const double within = ssw / static_cast<double>(n - k);
  return between / within;
}

std::vector<int> encode_labels(const std::vector<std::string>& labels, int* n_groups) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto [it, inserted] = ids.emplace(l, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  if (n_groups) *n_groups = static_cast<int>(ids.size());
  return out;
}

std::vector<FeatureScore> score_features(const Matrix& data,
                                         const std::vector<std::string>& columns,
                                         const std::vector<std::string>& labels,
                                         Execution exec) {
  if (static_cast<Eigen::Index>(columns.size()) != data.cols()) {
    throw ValidationError("score_features: column names do not match the data");
  }
  if (static_cast<Eigen::Index>(labels.size()) != data.rows()) {
    throw ValidationError("score_features: need one label per row");
  }
  int n_groups = 0;
  const auto groups = encode_labels(labels, &n_groups);
  std::vector<FeatureScore> scores(columns.size());
  parallel_for(columns.size(), exec, [&](std::size_t c) {
    std::vector<double> col(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      col[static_cast<std::size_t>(r)] = data(r, static_cast<Eigen::Index>(c));
    }
    scores[c] = {columns[c], anova_f(col, groups, n_groups)};
  });
  return scores;
}

std::vector<std::size_t> select_k_best_indices(const std::vector<FeatureScore>& scores,
                                               std::size_t k) {
  if (k < 1 || k > scores.size()) {
    throw ValidationError("select_k_best: k=" + std::to_string(k) + " outside 1.." +
                          std::to_string(scores.size()));
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].f > scores[b].f; });
  order.resize(k);
  return order;
}

std::vector<std::string> select_k_best(const std::vector<FeatureScore>& scores, std::size_t k) {
  std::vector<std::string> out;
  for (auto i : select_k_best_indices(scores, k)) out.push_back(scores[i].column);
  return out;
}

Matrix take_columns(const Matrix& data, const std::vector<std::size_t>& indices) {
  Matrix out(data.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = data.col(static_cast<Eigen::Index>(indices[j]));
  }
  return out;
}

}  // namespace qdroute::preprocess
