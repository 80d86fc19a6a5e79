#include "qdroute/silhouette.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>

#include "qdroute/error.hpp"

namespace qdroute::cluster {

SilhouetteResult silhouette(const Matrix& points, const std::vector<int>& assignments,
                            Execution exec) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (assignments.size() != n) throw ValidationError("silhouette: one label per point required");
  std::map<int, std::size_t> index;
  for (int a : assignments) index.emplace(a, 0);
  if (index.size() < 2) throw ValidationError("silhouette: need at least 2 clusters");

  SilhouetteResult res;
  for (auto& [label, idx] : index) {
    idx = res.cluster_ids.size();
    res.cluster_ids.push_back(label);
  }
  const std::size_t k = res.cluster_ids.size();
  std::vector<std::size_t> member(n);
  std::vector<double> sizes(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    member[i] = index[assignments[i]];
    sizes[member[i]] += 1.0;
  }

  res.scores.assign(n, 0.0);
  parallel_for(n, exec, [&](std::size_t i) {
    const std::size_t own = member[i];
    if (sizes[own] <= 1.0) return;
    std::vector<double> sum(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[member[j]] += (points.row(static_cast<Eigen::Index>(i)) -
                         points.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = sum[own] / (sizes[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sum[c] / sizes[c]);
    }
    const double denom = std::max(a, b);
    res.scores[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });

  res.profiles.resize(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res.profiles[member[i]].push_back(res.scores[i]);
    total += res.scores[i];
  }
  for (auto& p : res.profiles) std::sort(p.begin(), p.end(), std::greater<>());
  res.mean = total / static_cast<double>(n);
  return res;
}

}  // namespace qdroute::cluster
