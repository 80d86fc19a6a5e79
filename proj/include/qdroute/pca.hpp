#pragma once

#include "qdroute/matrix.hpp"

namespace qdroute::cluster {

struct PcaModel {
  Matrix components;           ///< dims x d, orthonormal rows
  Vector explained_variance;   ///< dims, descending
  Vector eigenvalues;          ///< all d eigenvalues of the covariance, descending
  Vector mean;                 ///< d
};

/// Eigendecomposition of the sample covariance (n-1 denominator). Each
/// component's largest-magnitude entry is made positive so the sign is
/// deterministic. Throws ValidationError unless 1 <= dims <= min(n-1, d).
PcaModel pca_fit(const Matrix& points, int dims);

Matrix pca_project(const PcaModel& model, const Matrix& points);
Matrix pca_reconstruct(const PcaModel& model, const Matrix& reduced);

}  // namespace qdroute::cluster
