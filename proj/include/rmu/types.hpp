#pragma once

#include <Eigen/Core>

namespace rmu {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MaskX = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace rmu
