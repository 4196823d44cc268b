#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace kfadmm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace kfadmm
