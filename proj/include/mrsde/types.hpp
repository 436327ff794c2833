#pragma once

#include <Eigen/Core>

namespace mrsde {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstVectorRef = Eigen::Ref<const VectorXd>;

inline constexpr double kDefaultG0Tol = 1e-10;

}  // namespace mrsde
