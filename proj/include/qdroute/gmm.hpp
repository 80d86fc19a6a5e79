#pragma once

#include <cstdint>
#include <vector>

#include "qdroute/matrix.hpp"

namespace qdroute::cluster {

struct GmmOptions {
  int max_iter = 300;
  double tol = 1e-8;   ///< stop when the log-likelihood gain drops below this
  double reg = 1e-6;   ///< added to every covariance diagonal
  int kmeans_n_init = 10;
};

struct GmmResult {
  Vector weights;                         ///< k, sums to 1
  Matrix means;                           ///< k x d
  std::vector<Eigen::MatrixXd> covariances;
  Matrix responsibilities;                ///< n x k, rows sum to 1
  double log_likelihood = 0.0;            ///< total over all points
  std::vector<double> log_likelihood_history;
  int iterations = 0;
  bool converged = false;

  std::vector<int> hard_assignments() const;
};

/// Full-covariance EM initialised from K-Means (means = centers, weights =
/// cluster fractions, covariances = per-cluster ML covariance + reg*I).
/// Throws ValidationError unless rows > k >= 1 and NumericError when a
/// covariance stops being positive definite.
GmmResult gmm_em(const Matrix& points, int k, std::uint64_t seed, const GmmOptions& opts = {});

}  // namespace qdroute::cluster
