#pragma once

#include <vector>

#include "qdroute/matrix.hpp"
#include "qdroute/parallel.hpp"

namespace qdroute::cluster {

struct SilhouetteResult {
  std::vector<double> scores;                ///< per point, in [-1, 1]
  std::vector<int> cluster_ids;              ///< distinct labels, ascending
  std::vector<std::vector<double>> profiles; ///< per cluster id, scores sorted descending
  double mean = 0.0;
};

/// s = (b - a) / max(a, b) with Euclidean distances; members of singleton
/// clusters score 0. Throws ValidationError for fewer than 2 clusters.
SilhouetteResult silhouette(const Matrix& points, const std::vector<int>& assignments,
                            Execution exec = Execution::Parallel);

}  // namespace qdroute::cluster
