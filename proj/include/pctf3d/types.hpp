#pragma once

#include <Eigen/Dense>

namespace pctf3d {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

} // namespace pctf3d
