#pragma once

#include <Eigen/Dense>

namespace hkl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace hkl
