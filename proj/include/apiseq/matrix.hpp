#pragma once

#include <Eigen/Core>

namespace apiseq {

/// Row-major so that one row is one embedding / one time step.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

}  // namespace apiseq
