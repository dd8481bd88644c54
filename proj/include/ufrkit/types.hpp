#pragma once

#include <Eigen/Dense>

namespace ufrkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Condition-number guard shared by every dense solve in the library.
inline constexpr double kMaxConditionNumber = 1e12;

}  // namespace ufrkit
