#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include "rmu/errors.hpp"
#include "rmu/model.hpp"
#include "rmu/solvers.hpp"
#include "rmu/types.hpp"

namespace rmu {

template <typename Scalar>
struct NnsvdFactors {
  MatrixX<Scalar> W;  // m x r
  MatrixX<Scalar> H;  // r x n, may contain exact zeros
};

// SVD-seeded nonnegative initialization. The leading singular triple is taken
// wholesale through absolute values; each further triple contributes whichever
// of its (positive, positive) or (negative, negative) section pair has the
// larger norm product, rescaled to preserve the triple's energy. Deterministic
// given a deterministic SVD; signs are pinned by making the first nonzero
// entry of each left singular vector positive (flipping u and v together).
template <typename Scalar>
NnsvdFactors<Scalar> nnsvd_init(const MatrixX<Scalar>& x, Eigen::Index r) {
  if (x.rows() < 1 || x.cols() < 1) throw DimensionMismatchError("nnsvd_init: empty X");
  if (r < 1 || r > std::min(x.rows(), x.cols())) {
    throw RankTooLargeError("nnsvd_init: need 1 <= r <= min(m, n)");
  }
  require_nonnegative(x, "nnsvd_init X");

  Eigen::BDCSVD<MatrixX<Scalar>> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  MatrixX<Scalar> u = svd.matrixU().leftCols(r);
  MatrixX<Scalar> v = svd.matrixV().leftCols(r);
  VectorX<Scalar> s = svd.singularValues().head(r);

  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      if (u(i, j) != Scalar(0)) {
        if (u(i, j) < Scalar(0)) {
          u.col(j) = -u.col(j);
          v.col(j) = -v.col(j);
        }
        break;
      }
    }
  }

  NnsvdFactors<Scalar> out;
  out.W = MatrixX<Scalar>::Zero(x.rows(), r);
  out.H = MatrixX<Scalar>::Zero(r, x.cols());

  const Scalar s0 = std::sqrt(s(0));
  out.W.col(0) = s0 * u.col(0).cwiseAbs();
  out.H.row(0) = s0 * v.col(0).cwiseAbs().transpose();

  for (Eigen::Index j = 1; j < r; ++j) {
    VectorX<Scalar> up = u.col(j).cwiseMax(Scalar(0));
    VectorX<Scalar> un = (-u.col(j)).cwiseMax(Scalar(0));
    VectorX<Scalar> vp = v.col(j).cwiseMax(Scalar(0));
    VectorX<Scalar> vn = (-v.col(j)).cwiseMax(Scalar(0));
    const Scalar mp = up.norm() * vp.norm();
    const Scalar mn = un.norm() * vn.norm();
    if (mp >= mn) {
      if (mp > Scalar(0)) {
        const Scalar scale = std::sqrt(s(j) * mp);
        out.W.col(j) = (scale / up.norm()) * up;
        out.H.row(j) = ((scale / vp.norm()) * vp).transpose();
      }
    } else {
      const Scalar scale = std::sqrt(s(j) * mn);
      out.W.col(j) = (scale / un.norm()) * un;
      out.H.row(j) = ((scale / vn.norm()) * vn).transpose();
    }
  }
  return out;
}

// Lift every entry to at least eps, then renormalize columns. Multiplicative
// updates cannot revive an exact zero, so initializations pass through here
// before any solver sees them.
template <typename Scalar>
MatrixX<Scalar> feasibilize(const MatrixX<Scalar>& h_raw, Scalar eps) {
  require_nonnegative(h_raw, "feasibilize");
  if (!(eps > Scalar(0))) throw ConfigError("feasibilize: eps must be > 0");
  MatrixX<Scalar> h = h_raw.cwiseMax(eps);
  return project_simplex_columns(h);
}

// Default floor: 1e-8 of the mean positive entry, falling back to a uniform
// matrix when there is nothing positive to take a scale from.
template <typename Scalar>
MatrixX<Scalar> feasibilize(const MatrixX<Scalar>& h_raw) {
  require_nonnegative(h_raw, "feasibilize");
  const auto arr = h_raw.array();
  const Eigen::Index npos = (arr > Scalar(0)).count();
  const Scalar eps = npos > 0
                         ? Scalar(1e-8) * arr.max(Scalar(0)).sum() / static_cast<Scalar>(npos)
                         : Scalar(1);
  return feasibilize(h_raw, eps);
}

// Penalty weight balancing the objective's two terms at the initial point:
// lambda * quasi_norm_half(H_init) = 0.5 ||X - W H_init||_F^2.
template <typename Scalar>
Scalar select_lambda(const MatrixX<Scalar>& x, const MatrixX<Scalar>& w,
                     const MatrixX<Scalar>& h_init) {
  if (x.rows() != w.rows() || w.cols() != h_init.rows() || h_init.cols() != x.cols()) {
    throw DimensionMismatchError("select_lambda: X, W, H_init shapes are inconsistent");
  }
  const Scalar denom = quasi_norm_half(h_init);
  if (!(denom > Scalar(0))) {
    throw DegeneratePenaltyError("select_lambda: quasi-norm of H_init is zero");
  }
  return Scalar(0.5) * (x - w * h_init).squaredNorm() / denom;
}

// Everything a solver run starts from: the fixed dictionary, the shared
// feasible initialization, and the penalty weight.
template <typename Scalar>
struct InitBundle {
  MatrixX<Scalar> W_init;  // m x r
  MatrixX<Scalar> H_init;  // r x n, strictly positive, column-stochastic
  Scalar lambda{0};
};

template <typename Scalar>
InitBundle<Scalar> make_init_bundle(const MatrixX<Scalar>& x, Eigen::Index r,
                                    std::optional<Scalar> lambda_override = std::nullopt) {
  NnsvdFactors<Scalar> f = nnsvd_init(x, r);
  InitBundle<Scalar> b;
  b.W_init = std::move(f.W);
  b.H_init = feasibilize(f.H);
  b.lambda = lambda_override ? *lambda_override : select_lambda(x, b.W_init, b.H_init);
  return b;
}

}  // namespace rmu
