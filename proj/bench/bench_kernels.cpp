// Serial reference against the OpenMP path for the parallel kernels.
// Arg 0 runs Execution::Serial, arg 1 Execution::Parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "qdroute/evaluation.hpp"
#include "qdroute/features.hpp"
#include "qdroute/ingest.hpp"
#include "qdroute/preprocess.hpp"
#include "qdroute/silhouette.hpp"
#include "qdroute/simulate.hpp"

using namespace qdroute;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

const std::vector<ingest::ClimbRecord>& mixed_climbs() {
  static const auto climbs = [] {
    const auto cfg = sim::load_simulation_config(std::string(QDROUTE_SOURCE_DIR) + "/configs/mixed33.yaml");
    const auto r = sim::simulate(cfg);
    std::vector<std::string> labels;
    for (const auto& t : r.truth) labels.push_back(t.route);
    return ingest::segment_climbs(r.merged(), {cfg.line.ie, labels}, cfg.line.gap_s);
  }();
  return climbs;
}

const features::FeatureMatrix& mixed_matrix() {
  static const auto m = features::build_feature_matrix(mixed_climbs(), {8, {}});
  return m;
}

Matrix random_points(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = d(rng) + 3.0 * (r % 3);
  }
  return m;
}

void BM_Simulate(benchmark::State& state) {
  const auto cfg = sim::load_simulation_config(std::string(QDROUTE_SOURCE_DIR) + "/configs/mixed33.yaml");
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(cfg, exec_of(state)));
}

void BM_FeatureMatrix(benchmark::State& state) {
  const auto& climbs = mixed_climbs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(features::build_feature_matrix(climbs, {8, {}}, {}, exec_of(state)));
  }
}

void BM_QuantileTransform(benchmark::State& state) {
  const auto& m = mixed_matrix();
  const auto scaler = preprocess::fit_quantile(m.values);
  for (auto _ : state) benchmark::DoNotOptimize(preprocess::transform(scaler, m.values, exec_of(state)));
}

void BM_RepeatedKMeans(benchmark::State& state) {
  const Matrix pts = random_points(33, 40, 1);
  std::vector<int> truth;
  for (int i = 0; i < 33; ++i) truth.push_back(i % 3);
  cluster::RestartOptions opts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cluster::repeated_kmeans_runs(pts, truth, 3, opts, exec_of(state)));
  }
}

void BM_Silhouette(benchmark::State& state) {
  const Matrix pts = random_points(2000, 2, 2);
  std::vector<int> labels;
  for (int i = 0; i < 2000; ++i) labels.push_back(i % 3);
  for (auto _ : state) benchmark::DoNotOptimize(cluster::silhouette(pts, labels, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_Simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FeatureMatrix)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuantileTransform)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RepeatedKMeans)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Silhouette)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
