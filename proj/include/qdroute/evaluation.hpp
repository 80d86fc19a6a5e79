#pragma once

#include <cstdint>
#include <vector>

#include "qdroute/kmeans.hpp"
#include "qdroute/matrix.hpp"
#include "qdroute/parallel.hpp"
#include "qdroute/preprocess.hpp"
#include "qdroute/rand_index.hpp"

namespace qdroute::cluster {

struct RandStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> per_restart;
};

struct RestartOptions {
  int restarts = 100;
  std::uint64_t seed0 = 0;
  /// Lloyd runs per restart, best inertia kept. 1 gives a single random
  /// initialisation per restart.
  int n_init = 10;
  KMeansOptions kmeans;
  RandVariant variant = RandVariant::Adjusted;
};

struct RepeatedKMeans {
  RandStats stats;
  std::vector<KMeansResult> runs;  ///< in seed order
  std::size_t best_run = 0;        ///< lowest inertia, earliest on ties
};

/// Restart r uses seed seed0 + r. Restarts run as independent OpenMP tasks
/// and are merged in seed order, so the result does not depend on `exec`.
RepeatedKMeans repeated_kmeans_runs(const Matrix& points, const std::vector<int>& truth, int k,
                                    const RestartOptions& opts = {},
                                    Execution exec = Execution::Parallel);

RandStats summarize_rand(const std::vector<int>& truth, const std::vector<KMeansResult>& runs,
                         RandVariant variant);

RandStats repeated_kmeans(const Matrix& points, const std::vector<int>& truth, int k,
                          const RestartOptions& opts = {}, Execution exec = Execution::Parallel);

struct SweepEntry {
  std::size_t n_features = 0;
  RandStats stats;     ///< in the requested variant
  RandStats adjusted;  ///< always adjusted; drives chosen_k
};

struct SweepCurve {
  std::vector<SweepEntry> entries;  ///< n_features = 1..max
  std::size_t chosen_k = 0;  ///< smallest count with the highest minimum adjusted rand index
};

/// Evaluates repeated K-Means on the top-1, top-2, ... scored columns.
/// max_features = 0 sweeps every column.
SweepCurve sweep_feature_count(const Matrix& data, const std::vector<int>& truth,
                               const std::vector<preprocess::FeatureScore>& scores, int k,
                               const RestartOptions& opts = {}, std::size_t max_features = 0,
                               Execution exec = Execution::Parallel);

/// Smallest count whose minimum adjusted rand index equals the curve's maximum.
std::size_t choose_feature_count(const std::vector<SweepEntry>& entries);

}  // namespace qdroute::cluster
