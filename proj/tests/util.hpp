#pragma once

#include <Eigen/Core>

#include "rmu/manifold.hpp"
#include "rmu/rng.hpp"
#include "rmu/solvers.hpp"
#include "rmu/types.hpp"

namespace testutil {

inline rmu::MatrixX<double> random_matrix(rmu::Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                          double lo = 0.0, double hi = 1.0) {
  rmu::MatrixX<double> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = lo + (hi - lo) * rng.next_double();
    }
  }
  return m;
}

inline rmu::MatrixX<double> random_signed(rmu::Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                          double scale = 1.0) {
  return random_matrix(rng, rows, cols, -scale, scale);
}

// strictly positive entries bounded away from zero, then unit-norm columns
inline rmu::ObliquePoint<double> random_oblique(rmu::Rng& rng, Eigen::Index r, Eigen::Index n,
                                                double lo = 0.05) {
  return rmu::ObliquePoint<double>(rmu::normalize_columns(random_matrix(rng, r, n, lo, 1.0)));
}

inline rmu::MatrixX<double> random_simplex(rmu::Rng& rng, Eigen::Index r, Eigen::Index n,
                                           double lo = 0.01) {
  return rmu::project_simplex_columns(random_matrix(rng, r, n, lo, 1.0));
}

}  // namespace testutil
