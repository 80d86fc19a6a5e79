#include "qdroute/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qdroute/error.hpp"
#include "qdroute/kmeans.hpp"

namespace qdroute::cluster {

namespace {

// E-step: fills responsibilities and returns the total log-likelihood.
double expectation(const Matrix& x, const GmmResult& model, Matrix& resp, int iteration) {
  const auto n = x.rows();
  const auto d = x.cols();
  const auto k = model.means.rows();
  Matrix log_prob(n, k);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.covariances[static_cast<std::size_t>(c)]);
    if (llt.info() != Eigen::Success) {
      throw NumericError("gmm: covariance of component " + std::to_string(c) +
                         " is not positive definite at iteration " + std::to_string(iteration) +
                         " (weight " + std::to_string(model.weights(c)) + ")");
    }
    const Eigen::MatrixXd L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    const double log_w = std::log(model.weights(c));
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd diff = (x.row(i) - model.means.row(c)).transpose();
      const Eigen::VectorXd y = L.triangularView<Eigen::Lower>().solve(diff);
      log_prob(i, c) = log_w - 0.5 * (static_cast<double>(d) * log_2pi + log_det + y.squaredNorm());
    }
  }
  double total = 0.0;
  resp.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = log_prob.row(i).maxCoeff();
    const double lse = top + std::log((log_prob.row(i).array() - top).exp().sum());
    resp.row(i) = (log_prob.row(i).array() - lse).exp();
    total += lse;
  }
  return total;
}

void maximization(const Matrix& x, const Matrix& resp, double reg, GmmResult& model) {
  const auto n = x.rows();
  const auto d = x.cols();
  const auto k = resp.cols();
  Vector nk = resp.colwise().sum().transpose();
  nk.array() += 10.0 * std::numeric_limits<double>::epsilon();
  model.weights = nk / nk.sum();
  model.means = (resp.transpose() * x).array().colwise() / nk.array();
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd diff = (x.row(i) - model.means.row(c)).transpose();
      cov.noalias() += resp(i, c) * diff * diff.transpose();
    }
    cov /= nk(c);
    cov.diagonal().array() += reg;
    model.covariances[static_cast<std::size_t>(c)] = cov;
  }
}

}  // namespace

std::vector<int> GmmResult::hard_assignments() const {
  std::vector<int> out(static_cast<std::size_t>(responsibilities.rows()));
  for (Eigen::Index i = 0; i < responsibilities.rows(); ++i) {
    Eigen::Index arg = 0;
    responsibilities.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

GmmResult gmm_em(const Matrix& points, int k, std::uint64_t seed, const GmmOptions& opts) {
  const auto n = points.rows();
  const auto d = points.cols();
  if (k < 1 || n <= k) {
    throw ValidationError("gmm: need n > k >= 1 (n=" + std::to_string(n) + ", k=" +
                          std::to_string(k) + ")");
  }
  if (!(opts.reg >= 0.0)) throw ValidationError("gmm: reg must be >= 0");

  const auto init = kmeans_best_of(points, k, seed, opts.kmeans_n_init);
  Matrix resp = Matrix::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) resp(i, init.assignments[static_cast<std::size_t>(i)]) = 1.0;

  GmmResult model;
  model.covariances.assign(static_cast<std::size_t>(k), Eigen::MatrixXd::Identity(d, d));
  maximization(points, resp, opts.reg, model);

  double ll = expectation(points, model, resp, 0);
  model.log_likelihood_history.push_back(ll);
  for (int it = 1; it <= opts.max_iter; ++it) {
    model.iterations = it;
    maximization(points, resp, opts.reg, model);
    const double next = expectation(points, model, resp, it);
    model.log_likelihood_history.push_back(next);
    const double gain = next - ll;
    ll = next;
    if (gain < opts.tol) {
      model.converged = true;
      break;
    }
  }
  model.responsibilities = resp;
  model.log_likelihood = ll;
  return model;
}

}  // namespace qdroute::cluster
