#include "qdroute/evaluation.hpp"

#include <algorithm>
#include <string>

#include "qdroute/error.hpp"

namespace qdroute::cluster {

RepeatedKMeans repeated_kmeans_runs(const Matrix& points, const std::vector<int>& truth, int k,
                                    const RestartOptions& opts, Execution exec) {
  if (opts.restarts < 1) throw ValidationError("repeated_kmeans: restarts must be >= 1");
  if (truth.size() != static_cast<std::size_t>(points.rows())) {
    throw ValidationError("repeated_kmeans: need one truth label per point");
  }
  if (k < 1 || k > points.rows()) {
    throw ValidationError("repeated_kmeans: need 1 <= k <= n (k=" + std::to_string(k) + ")");
  }
  const auto restarts = static_cast<std::size_t>(opts.restarts);
  RepeatedKMeans out;
  out.runs.resize(restarts);
  parallel_for(restarts, exec, [&](std::size_t r) {
    out.runs[r] = kmeans_best_of(points, k, opts.seed0 + r, opts.n_init, opts.kmeans);
  });
  for (std::size_t r = 1; r < restarts; ++r) {
    if (out.runs[r].inertia < out.runs[out.best_run].inertia) out.best_run = r;
  }
  out.stats = summarize_rand(truth, out.runs, opts.variant);
  return out;
}

RandStats summarize_rand(const std::vector<int>& truth, const std::vector<KMeansResult>& runs,
                         RandVariant variant) {
  if (runs.empty()) throw ValidationError("summarize_rand: no runs");
  RandStats s;
  s.per_restart.reserve(runs.size());
  for (const auto& run : runs) s.per_restart.push_back(rand_index(truth, run.assignments, variant));
  double sum = 0.0;
  s.min = s.per_restart.front();
  s.max = s.per_restart.front();
  for (double v : s.per_restart) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.per_restart.size());
  return s;
}

RandStats repeated_kmeans(const Matrix& points, const std::vector<int>& truth, int k,
                          const RestartOptions& opts, Execution exec) {
  return repeated_kmeans_runs(points, truth, k, opts, exec).stats;
}

std::size_t choose_feature_count(const std::vector<SweepEntry>& entries) {
  if (entries.empty()) throw ValidationError("sweep: no entries");
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].adjusted.min > entries[best].adjusted.min) best = i;
  }
  return entries[best].n_features;
}

SweepCurve sweep_feature_count(const Matrix& data, const std::vector<int>& truth,
                               const std::vector<preprocess::FeatureScore>& scores, int k,
                               const RestartOptions& opts, std::size_t max_features,
                               Execution exec) {
  if (scores.size() != static_cast<std::size_t>(data.cols())) {
    throw ValidationError("sweep: scores must cover every column");
  }
  const std::size_t limit =
      max_features == 0 ? scores.size() : std::min(max_features, scores.size());
  const auto order = preprocess::select_k_best_indices(scores, scores.size());
  SweepCurve curve;
  for (std::size_t m = 1; m <= limit; ++m) {
    const std::vector<std::size_t> cols(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    const auto subset = preprocess::take_columns(data, cols);
    auto runs = repeated_kmeans_runs(subset, truth, k, opts, exec);
    SweepEntry entry{m, std::move(runs.stats), {}};
    entry.adjusted = opts.variant == RandVariant::Adjusted
                         ? entry.stats
                         : summarize_rand(truth, runs.runs, RandVariant::Adjusted);
    curve.entries.push_back(std::move(entry));
  }
  curve.chosen_k = choose_feature_count(curve.entries);
  return curve;
}

}  // namespace qdroute::cluster
