#include "qdroute/pca.hpp"

#include <string>

#include "qdroute/error.hpp"

namespace qdroute::cluster {

PcaModel pca_fit(const Matrix& points, int dims) {
  const auto n = points.rows();
  const auto d = points.cols();
  if (dims < 1 || dims > std::min<Eigen::Index>(n - 1, d)) {
    throw ValidationError("pca: dims=" + std::to_string(dims) + " outside 1..min(n-1, d)");
  }
  PcaModel model;
  model.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");
  // Eigen returns ascending order.
  model.eigenvalues = solver.eigenvalues().reverse();
  model.explained_variance = model.eigenvalues.head(dims);
  model.components.resize(dims, d);
  for (int c = 0; c < dims; ++c) {
    Vector v = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    model.components.row(c) = v.transpose();
  }
  return model;
}

Matrix pca_project(const PcaModel& model, const Matrix& points) {
  if (points.cols() != model.mean.size()) throw ValidationError("pca: column count mismatch");
  const Matrix centered = points.rowwise() - model.mean.transpose();
  return centered * model.components.transpose();
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& reduced) {
  Matrix out = reduced * model.components;
  out.rowwise() += model.mean.transpose();
  return out;
}

}  // namespace qdroute::cluster
