#include "qdroute/kmeans.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "qdroute/error.hpp"
#include "qdroute/rng.hpp"

namespace qdroute::cluster {

namespace {

double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// Returns the assignment's total cost; dist[i] gets each point's cost.
double assign(const Matrix& points, const Matrix& centers, std::vector<int>& labels,
              std::vector<double>& dist) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = sq_dist(points, i, centers, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[static_cast<std::size_t>(i)] = best_d;
    total += best_d;
  }
  return total;
}

// Moves the farthest point of a multi-member cluster into each empty one.
void repair_empty(const Matrix& points, Matrix& centers, std::vector<int>& labels,
                  std::vector<double>& dist) {
  const auto k = static_cast<std::size_t>(centers.rows());
  std::vector<int> sizes(k, 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    std::size_t far = labels.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (sizes[static_cast<std::size_t>(labels[i])] > 1 && dist[i] > far_d) {
        far_d = dist[i];
        far = i;
      }
    }
    if (far == labels.size()) break;
    --sizes[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<int>(c);
    sizes[c] = 1;
    dist[far] = 0.0;
    centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
  }
}

}  // namespace

double inertia_of(const Matrix& points, const Matrix& centers, const std::vector<int>& assignments) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += sq_dist(points, i, centers, assignments[static_cast<std::size_t>(i)]);
  }
  return total;
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opts) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw ValidationError("kmeans: need 1 <= k <= n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
  }
  KMeansResult res;
  res.seed = seed;

  // k distinct rows by a partial Fisher-Yates shuffle.
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) {
    const auto pick = j + static_cast<std::size_t>(uniform_index(rng, n - j));
    std::swap(idx[j], idx[pick]);
  }
  res.centers.resize(k, points.cols());
  for (int c = 0; c < k; ++c) {
    res.centers.row(c) = points.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
  }

  res.assignments.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  Matrix next(k, points.cols());
  std::vector<int> counts(static_cast<std::size_t>(k));
  for (int it = 1; it <= opts.max_iter; ++it) {
    res.iterations = it;
    assign(points, res.centers, res.assignments, dist);
    repair_empty(points, res.centers, res.assignments, dist);
    double cost = 0.0;
    for (double d : dist) cost += d;
    res.inertia_history.push_back(cost);

    next.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      next.row(res.assignments[i]) += points.row(static_cast<Eigen::Index>(i));
      ++counts[static_cast<std::size_t>(res.assignments[i])];
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      shift = std::max(shift, (next.row(c) - res.centers.row(c)).norm());
    }
    res.centers = next;
    if (shift < opts.tol) break;
  }
  res.inertia = assign(points, res.centers, res.assignments, dist);
  return res;
}

KMeansResult kmeans_best_of(const Matrix& points, int k, std::uint64_t seed, int n_init,
                            const KMeansOptions& opts) {
  if (n_init < 1) throw ValidationError("kmeans: n_init must be >= 1");
  if (n_init == 1) return kmeans(points, k, seed, opts);
  KMeansResult best;
  for (int j = 0; j < n_init; ++j) {
    auto run = kmeans(points, k, derive_seed(seed, static_cast<std::uint64_t>(j), 0x3ea5), opts);
    if (j == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace qdroute::cluster
