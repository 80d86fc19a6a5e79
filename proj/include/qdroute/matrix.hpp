#pragma once

#include <Eigen/Dense>

namespace qdroute {

/// Row-major dense matrix; rows are observations (climbs).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace qdroute
