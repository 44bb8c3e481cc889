#pragma once

#include <Eigen/Dense>

namespace saddlelab {

using Point = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace saddlelab
