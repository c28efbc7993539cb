#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <utility>

#include "rmu/errors.hpp"
#include "rmu/types.hpp"

namespace rmu {

// Columns count as unit-norm / tangent when they match within these bounds
// (double instantiations; wider scalars fall back to a multiple of epsilon).
inline constexpr double kUnitColumnTol = 1e-12;
inline constexpr double kTangentTol = 1e-10;
inline constexpr double kZeroColumnFloor = 1e-300;

template <typename Scalar>
constexpr Scalar unit_column_tol() {
  constexpr Scalar eps_based = Scalar(100) * std::numeric_limits<Scalar>::epsilon();
  return eps_based > Scalar(kUnitColumnTol) ? eps_based : Scalar(kUnitColumnTol);
}

template <typename Scalar>
constexpr Scalar tangent_tol() {
  constexpr Scalar eps_based = Scalar(100) * std::numeric_limits<Scalar>::epsilon();
  return eps_based > Scalar(kTangentTol) ? eps_based : Scalar(kTangentTol);
}

// diag(a^T b) as a row vector: one dot product per column pair, never the full
// n x n product.
template <typename DerivedA, typename DerivedB>
auto column_dots(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return (a.derived().cwiseProduct(b.derived())).colwise().sum();
}

template <typename Derived>
bool is_on_manifold(const Eigen::MatrixBase<Derived>& m, double tol = kUnitColumnTol) {
  using Scalar = typename Derived::Scalar;
  return ((m.derived().colwise().norm().array() - Scalar(1)).abs() <= Scalar(tol)).all();
}

// Rescales every column to unit 2-norm.
template <typename Scalar>
MatrixX<Scalar> normalize_columns(const MatrixX<Scalar>& m) {
  RowVectorX<Scalar> norms = m.colwise().norm();
  if ((norms.array() <= Scalar(kZeroColumnFloor)).any()) {
    throw ZeroColumnError("normalize_columns: a column has numerically zero norm");
  }
  RowVectorX<Scalar> inv = norms.cwiseInverse();
  return m * inv.asDiagonal();
}

// A point on the oblique manifold: an r x n matrix whose columns all have unit
// 2-norm. Construction validates, so a held instance is always feasible.
template <typename Scalar>
class ObliquePoint {
 public:
  explicit ObliquePoint(MatrixX<Scalar> values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
      throw DimensionMismatchError("ObliquePoint: need at least a 1 x 1 matrix");
    }
    if (!is_on_manifold(values_, static_cast<double>(unit_column_tol<Scalar>()))) {
      throw NotOnManifoldError("ObliquePoint: columns are not unit-norm within tolerance");
    }
  }

  const MatrixX<Scalar>& values() const { return values_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

 private:
  MatrixX<Scalar> values_;
};

// A tangent vector at a base point: diag(base^T values) vanishes column by
// column. The check scales with the column magnitude so large descent
// directions, whose rounding error grows proportionally, still validate.
template <typename Scalar>
class TangentVector {
 public:
  TangentVector(MatrixX<Scalar> values, ObliquePoint<Scalar> base)
      : values_(std::move(values)), base_(std::move(base)) {
    if (values_.rows() != base_.rows() || values_.cols() != base_.cols()) {
      throw DimensionMismatchError("TangentVector: shape does not match the base point");
    }
    RowVectorX<Scalar> dots = column_dots(base_.values(), values_);
    RowVectorX<Scalar> scale =
        RowVectorX<Scalar>::Ones(values_.cols()) + values_.colwise().norm();
    if (!(dots.cwiseAbs().array() <= tangent_tol<Scalar>() * scale.array()).all()) {
      throw NotTangentError("TangentVector: diag(base^T values) is not zero within tolerance");
    }
  }

  const MatrixX<Scalar>& values() const { return values_; }
  const ObliquePoint<Scalar>& base() const { return base_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

 private:
  MatrixX<Scalar> values_;
  ObliquePoint<Scalar> base_;
};

// Tangent component of z at base_values, as a plain matrix:
// z - base . diag(base^T z). Building block for the validated projectors.
template <typename Scalar>
MatrixX<Scalar> tangent_part(const MatrixX<Scalar>& base_values, const MatrixX<Scalar>& z) {
  RowVectorX<Scalar> dots = column_dots(base_values, z);
  return z - base_values * dots.asDiagonal();
}

template <typename Scalar>
TangentVector<Scalar> project_tangent(const ObliquePoint<Scalar>& a, const MatrixX<Scalar>& z) {
  if (z.rows() != a.rows() || z.cols() != a.cols()) {
    throw DimensionMismatchError("project_tangent: shape does not match the point");
  }
  return TangentVector<Scalar>(tangent_part(a.values(), z), a);
}

// Normal component: base . diag(base^T z), exactly what project_tangent removes.
template <typename Scalar>
MatrixX<Scalar> project_normal(const ObliquePoint<Scalar>& a, const MatrixX<Scalar>& z) {
  if (z.rows() != a.rows() || z.cols() != a.cols()) {
    throw DimensionMismatchError("project_normal: shape does not match the point");
  }
  RowVectorX<Scalar> dots = column_dots(a.values(), z);
  return a.values() * dots.asDiagonal();
}

// Metric retraction: renormalize the columns of base + z. Throws ZeroColumn if
// a column of the sum vanishes (the retraction is undefined there).
template <typename Scalar>
ObliquePoint<Scalar> retract(const ObliquePoint<Scalar>& a, const TangentVector<Scalar>& z) {
  if (z.rows() != a.rows() || z.cols() != a.cols()) {
    throw DimensionMismatchError("retract: shapes do not match");
  }
  MatrixX<Scalar> sum = a.values() + z.values();
  return ObliquePoint<Scalar>(normalize_columns(sum));
}

}  // namespace rmu
