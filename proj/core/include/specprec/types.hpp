#pragma once

#include <Eigen/Core>

namespace specprec {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n x d matrix, one point per row.
using PointSet = Eigen::MatrixXd;

}  // namespace specprec
