#pragma once

#include <cstdint>
#include <vector>

#include "qdroute/matrix.hpp"

namespace qdroute::cluster {

struct KMeansOptions {
  int max_iter = 300;
  double tol = 1e-6;  ///< stop when no center moves by this much (Euclidean)
};

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centers;  ///< k x d
  double inertia = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  ///< after each assignment step
};

/// One Lloyd run. Initial centers are k distinct rows drawn uniformly with
/// the seeded generator; ties in assignment go to the lowest cluster index;
/// an empty cluster takes over the point farthest from its center. Throws
/// ValidationError unless 1 <= k <= rows.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                    const KMeansOptions& opts = {});

/// Lowest-inertia result among n_init Lloyd runs with seeds derived from
/// `seed` (n_init == 1 runs kmeans(points, k, seed) itself).
KMeansResult kmeans_best_of(const Matrix& points, int k, std::uint64_t seed, int n_init,
                            const KMeansOptions& opts = {});

/// Sum of squared distances of each point to its assigned center.
double inertia_of(const Matrix& points, const Matrix& centers, const std::vector<int>& assignments);

}  // namespace qdroute::cluster
