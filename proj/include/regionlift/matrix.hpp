#pragma once

#include <Eigen/Core>

namespace regionlift {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace regionlift
