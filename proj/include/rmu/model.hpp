#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <utility>

#include "rmu/errors.hpp"
#include "rmu/manifold.hpp"
#include "rmu/types.hpp"

namespace rmu {

inline constexpr double kNegativeEntryTol = 1e-12;
inline constexpr double kSimplexFeasTol = 1e-8;

template <typename Derived>
void require_nonnegative(const Eigen::MatrixBase<Derived>& m, const char* who) {
  using Scalar = typename Derived::Scalar;
  if ((m.derived().array() < Scalar(-kNegativeEntryTol)).any()) {
    throw NegativeEntryError(std::string(who) + ": negative entries are not allowed");
  }
}

template <typename Scalar>
void require_simplex_columns(const MatrixX<Scalar>& h, double tol, const char* who) {
  require_nonnegative(h, who);
  RowVectorX<Scalar> sums = h.colwise().sum();
  if (!((sums.array() - Scalar(1)).abs() <= Scalar(tol)).all()) {
    throw NotOnSimplexError(std::string(who) + ": column sums must be 1 within tolerance");
  }
}

// Least-squares data plus the sparsity weight. W stays fixed for a whole run;
// only the coefficient matrix H is optimized.
template <typename Scalar>
struct ProblemInstance {
  MatrixX<Scalar> X;   // m x n, nonnegative
  MatrixX<Scalar> W;   // m x r, nonnegative
  Scalar lambda{0};    // penalty weight, >= 0

  ProblemInstance(MatrixX<Scalar> x, MatrixX<Scalar> w, Scalar lambda_in)
      : X(std::move(x)), W(std::move(w)), lambda(lambda_in) {
    if (X.rows() < 1 || X.cols() < 1 || W.cols() < 1) {
      throw DimensionMismatchError("ProblemInstance: empty data");
    }
    if (X.rows() != W.rows()) {
      throw DimensionMismatchError("ProblemInstance: X and W row counts differ");
    }
    require_nonnegative(X, "ProblemInstance X");
    require_nonnegative(W, "ProblemInstance W");
    if (!(lambda >= Scalar(0)) || !std::isfinite(static_cast<double>(lambda))) {
      throw ConfigError("ProblemInstance: lambda must be finite and >= 0");
    }
  }

  Eigen::Index m() const { return X.rows(); }
  Eigen::Index n() const { return X.cols(); }
  Eigen::Index r() const { return W.cols(); }
};

// Q = W^T W, P = W^T X and ||X||_F^2, computed once per run. Everything the
// iterations need that does not change with H, so the per-iteration cost has
// no m in it.
template <typename Scalar>
struct GramCache {
  MatrixX<Scalar> Q;  // r x r
  MatrixX<Scalar> P;  // r x n
  Scalar x_sqnorm;    // ||X||_F^2, lets objectives avoid the m x n residual

  explicit GramCache(const ProblemInstance<Scalar>& inst)
      : Q(inst.W.transpose() * inst.W),
        P(inst.W.transpose() * inst.X),
        x_sqnorm(inst.X.squaredNorm()) {}
};

// Sum of entrywise square roots. Entries within the negativity tolerance are
// clamped so representation noise cannot produce NaN.
template <typename Derived>
typename Derived::Scalar quasi_norm_half(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::Scalar;
  require_nonnegative(h, "quasi_norm_half");
  return h.derived().array().max(Scalar(0)).sqrt().sum();
}

// F(H) = 1/2 ||X - W H||_F^2 + lambda * sum_ij sqrt(H_ij)
template <typename Scalar>
Scalar objective_nssls(const ProblemInstance<Scalar>& inst, const MatrixX<Scalar>& h) {
  if (h.rows() != inst.r() || h.cols() != inst.n()) {
    throw DimensionMismatchError("objective_nssls: H must be r x n");
  }
  require_nonnegative(h, "objective_nssls H");
  const Scalar fit = Scalar(0.5) * (inst.X - inst.W * h).squaredNorm();
  return fit + inst.lambda * quasi_norm_half(h);
}

template <typename Scalar>
MatrixX<Scalar> hadamard_square(const ObliquePoint<Scalar>& a) {
  return a.values().cwiseProduct(a.values());
}

// Entrywise square root of a column-stochastic nonnegative matrix, followed by
// a renormalization that absorbs the feasibility slack, landing exactly on the
// manifold.
template <typename Scalar>
ObliquePoint<Scalar> lift_to_oblique(const MatrixX<Scalar>& h) {
  require_simplex_columns(h, kSimplexFeasTol, "lift_to_oblique");
  MatrixX<Scalar> a = h.cwiseMax(Scalar(0)).cwiseSqrt();
  return ObliquePoint<Scalar>(normalize_columns(a));
}

// f(A) = 1/4 ||X - W (A.*A)||_F^2 + lambda ||A||_1, the square-root
// parametrization of the NSSls objective.
template <typename Scalar>
Scalar objective_quartic(const ProblemInstance<Scalar>& inst, const ObliquePoint<Scalar>& a) {
  if (a.rows() != inst.r() || a.cols() != inst.n()) {
    throw DimensionMismatchError("objective_quartic: A must be r x n");
  }
  const MatrixX<Scalar> h = hadamard_square(a);
  return Scalar(0.25) * (inst.X - inst.W * h).squaredNorm() +
         inst.lambda * a.values().template lpNorm<1>();
}

// G = (Q (A.*A)) .* A - P .* A + lambda * sign(A). Exact gradient of the
// quartic objective away from the l1 kink; a subgradient selection (sign(0)=0)
// on it.
template <typename Scalar>
MatrixX<Scalar> euclidean_subgradient(const ProblemInstance<Scalar>& inst,
                                      const GramCache<Scalar>& cache,
                                      const ObliquePoint<Scalar>& a) {
  if (a.rows() != inst.r() || a.cols() != inst.n()) {
    throw DimensionMismatchError("euclidean_subgradient: A must be r x n");
  }
  const MatrixX<Scalar>& av = a.values();
  MatrixX<Scalar> h = av.cwiseProduct(av);
  return (cache.Q * h).cwiseProduct(av) - cache.P.cwiseProduct(av) +
         inst.lambda * av.cwiseSign();
}

// The Riemannian subgradient split into two entrywise-nonnegative parts with
// plus - minus = tangent projection of the Euclidean subgradient. The diagonal
// corrections are column dot products; nothing here forms an n x n matrix.
template <typename Scalar>
struct SplitGradient {
  MatrixX<Scalar> plus;
  MatrixX<Scalar> minus;
  Scalar lambda_prime;
};

template <typename Scalar>
SplitGradient<Scalar> split_subgradient(const ProblemInstance<Scalar>& inst,
                                        const GramCache<Scalar>& cache,
                                        const ObliquePoint<Scalar>& a) {
  if (a.rows() != inst.r() || a.cols() != inst.n()) {
    throw DimensionMismatchError("split_subgradient: A must be r x n");
  }
  const MatrixX<Scalar>& av = a.values();
  const Scalar lp = inst.lambda;
  MatrixX<Scalar> h = av.cwiseProduct(av);
  MatrixX<Scalar> qa = (cache.Q * h).cwiseProduct(av);  // (Q (A.*A)) .* A
  MatrixX<Scalar> pa = cache.P.cwiseProduct(av);        // P .* A
  MatrixX<Scalar> sg = av.cwiseSign();
  RowVectorX<Scalar> d_pa = column_dots(av, pa);
  RowVectorX<Scalar> d_qa = column_dots(av, qa);
  RowVectorX<Scalar> d_sg = column_dots(av, sg);

  SplitGradient<Scalar> out;
  out.plus = qa + av * d_pa.asDiagonal() + lp * sg;
  out.minus = pa + av * d_qa.asDiagonal() + lp * (av * d_sg.asDiagonal());
  out.lambda_prime = lp;
  return out;
}

// Riemannian (sub)gradient: tangent projection of the Euclidean one.
template <typename Scalar>
TangentVector<Scalar> riemannian_gradient(const ProblemInstance<Scalar>& inst,
                                          const GramCache<Scalar>& cache,
                                          const ObliquePoint<Scalar>& a) {
  return project_tangent(a, euclidean_subgradient(inst, cache, a));
}

}  // namespace rmu
