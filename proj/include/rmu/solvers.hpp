#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rmu/clock.hpp"
#include "rmu/errors.hpp"
#include "rmu/manifold.hpp"
#include "rmu/model.hpp"
#include "rmu/types.hpp"

namespace rmu {

enum class Method { Rmu, Rcg, EmuProj, SparseMuProj };

inline constexpr std::array<Method, 4> kMethodOrder{Method::Rmu, Method::Rcg, Method::EmuProj,
                                                    Method::SparseMuProj};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Rmu:
      return "RMU";
    case Method::Rcg:
      return "RCG";
    case Method::EmuProj:
      return "EMU-proj";
    case Method::SparseMuProj:
      return "SparseMU-proj";
  }
  return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "rmu") return Method::Rmu;
  if (s == "rcg") return Method::Rcg;
  if (s == "emu-proj" || s == "emu") return Method::EmuProj;
  if (s == "sparsemu-proj" || s == "sparsemu" || s == "smu-l1" || s == "smu") {
    return Method::SparseMuProj;
  }
  return std::nullopt;
}

struct SolverConfig {
  long k_max = 1000;              // iteration cap
  double t_max_seconds = 5.0;     // accumulated step-time cap
  double epsilon_floor = 1e-16;   // multiplicative-update denominator guard
  double rcg_c1 = 1e-4;           // Armijo constant
  double rcg_c2 = 0.9;            // curvature constant
  int rcg_max_evals = 5;          // objective/gradient evaluations per line search
  double rcg_grad_tol = 1e-13;    // converged when ||grad|| <= tol * (1 + ||P||_F)

  void validate() const {
    if (k_max < 1) throw ConfigError("SolverConfig: k_max must be >= 1");
    if (!(t_max_seconds > 0)) throw ConfigError("SolverConfig: t_max must be > 0");
    if (!(epsilon_floor > 0)) throw ConfigError("SolverConfig: epsilon_floor must be > 0");
    if (!(rcg_c1 > 0) || !(rcg_c1 < rcg_c2) || !(rcg_c2 < 1)) {
      throw ConfigError("SolverConfig: need 0 < c1 < c2 < 1");
    }
    if (rcg_max_evals < 1) throw ConfigError("SolverConfig: rcg_max_evals must be >= 1");
    if (!(rcg_grad_tol > 0)) throw ConfigError("SolverConfig: rcg_grad_tol must be > 0");
  }
};

// Rescale each column of a nonnegative matrix to unit 1-norm. Zero pattern is
// preserved; a column with no mass at all is an error.
template <typename Scalar>
MatrixX<Scalar> project_simplex_columns(const MatrixX<Scalar>& m) {
  require_nonnegative(m, "project_simplex_columns");
  MatrixX<Scalar> clamped = m.cwiseMax(Scalar(0));
  RowVectorX<Scalar> sums = clamped.colwise().sum();
  if ((sums.array() <= Scalar(kZeroColumnFloor)).any()) {
    throw ZeroColumnError("project_simplex_columns: a column has no mass");
  }
  RowVectorX<Scalar> inv = sums.cwiseInverse();
  return clamped * inv.asDiagonal();
}

// One multiplicative update on the manifold: scale A entrywise by the ratio of
// the negative to the (floored) positive split part, then renormalize columns.
// Zero entries of A stay exactly zero.
template <typename Scalar>
ObliquePoint<Scalar> rmu_step(const ProblemInstance<Scalar>& inst, const GramCache<Scalar>& cache,
                              const ObliquePoint<Scalar>& a, const SolverConfig& cfg) {
  SplitGradient<Scalar> g = split_subgradient(inst, cache, a);
  MatrixX<Scalar> b =
      a.values().cwiseProduct(g.minus.cwiseQuotient(g.plus.cwiseMax(Scalar(cfg.epsilon_floor))));
  return ObliquePoint<Scalar>(normalize_columns(b));
}

// Multiplicative update whose denominator carries Q H plus the scalar
// lambda/2 * sum_ij sqrt(H_ij), added uniformly to every entry, followed by
// the column simplex projection.
template <typename Scalar>
MatrixX<Scalar> emu_step(const ProblemInstance<Scalar>& inst, const GramCache<Scalar>& cache,
                         const MatrixX<Scalar>& h, const SolverConfig& cfg) {
  if (h.rows() != inst.r() || h.cols() != inst.n()) {
    throw DimensionMismatchError("emu_step: H must be r x n");
  }
  require_nonnegative(h, "emu_step H");
  const Scalar shift = Scalar(0.5) * inst.lambda * h.array().max(Scalar(0)).sqrt().sum();
  MatrixX<Scalar> denom =
      ((cache.Q * h).array() + shift).max(Scalar(cfg.epsilon_floor)).matrix();
  MatrixX<Scalar> next = h.cwiseProduct(cache.P.cwiseQuotient(denom));
  return project_simplex_columns(next);
}

// Same update with a constant lambda shift in the denominator.
template <typename Scalar>
MatrixX<Scalar> sparsemu_step(const ProblemInstance<Scalar>& inst, const GramCache<Scalar>& cache,
                              const MatrixX<Scalar>& h, const SolverConfig& cfg) {
  if (h.rows() != inst.r() || h.cols() != inst.n()) {
    throw DimensionMismatchError("sparsemu_step: H must be r x n");
  }
  require_nonnegative(h, "sparsemu_step H");
  MatrixX<Scalar> denom =
      ((cache.Q * h).array() + inst.lambda).max(Scalar(cfg.epsilon_floor)).matrix();
  MatrixX<Scalar> next = h.cwiseProduct(cache.P.cwiseQuotient(denom));
  return project_simplex_columns(next);
}

namespace detail {

template <typename Scalar>
Scalar frob_dot(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  return (a.array() * b.array()).sum();
}

// F(H) through the cached Grams: 1/2 (||X||^2 - 2<P,H> + <H,QH>) + penalty.
// Same value as objective_nssls to rounding, without touching the m x n
// residual, so recording it every iteration stays cheap.
template <typename Scalar>
Scalar objective_nssls_cached(const GramCache<Scalar>& cache, Scalar lambda,
                              const MatrixX<Scalar>& h) {
  const Scalar cross = frob_dot(cache.P, h);
  const Scalar quad = (h.cwiseProduct(cache.Q * h)).sum();
  Scalar value = Scalar(0.5) * (cache.x_sqnorm - 2 * cross + quad);
  if (lambda != Scalar(0)) value += lambda * h.array().max(Scalar(0)).sqrt().sum();
  return value;
}

// f(A) through the same identity, with the 1/4 weight and the l1 term.
template <typename Scalar>
Scalar objective_quartic_cached(const GramCache<Scalar>& cache, Scalar lambda,
                                const MatrixX<Scalar>& a_values, const MatrixX<Scalar>& h,
                                const MatrixX<Scalar>& qh) {
  const Scalar cross = frob_dot(cache.P, h);
  const Scalar quad = frob_dot(h, qh);
  return Scalar(0.25) * (cache.x_sqnorm - 2 * cross + quad) + lambda * a_values.cwiseAbs().sum();
}

template <typename Scalar>
struct TrialPoint {
  Scalar alpha;
  ObliquePoint<Scalar> point;
  Scalar f;
  MatrixX<Scalar> eucl_grad;
  Scalar dphi;  // derivative of alpha -> f(R_A(alpha d)) at this alpha
};

// Evaluate objective and exact step-size derivative along the retracted ray
// R_A(alpha d). One Gram product serves the value and the Euclidean gradient;
// the derivative goes through d(u/||u||) = d/||u|| - u (u^T d)/||u||^3.
template <typename Scalar>
TrialPoint<Scalar> eval_trial(const ProblemInstance<Scalar>& inst, const GramCache<Scalar>& cache,
                              const MatrixX<Scalar>& a, const MatrixX<Scalar>& d, Scalar alpha) {
  MatrixX<Scalar> u = a + alpha * d;
  RowVectorX<Scalar> nrm = u.colwise().norm();
  if ((nrm.array() <= Scalar(kZeroColumnFloor)).any()) {
    throw ZeroColumnError("rcg line search: trial step collapsed a column");
  }
  RowVectorX<Scalar> inv = nrm.cwiseInverse();
  ObliquePoint<Scalar> c(u * inv.asDiagonal());
  const MatrixX<Scalar>& cv = c.values();
  MatrixX<Scalar> h = cv.cwiseProduct(cv);
  MatrixX<Scalar> qh = cache.Q * h;
  const Scalar f = objective_quartic_cached(cache, inst.lambda, cv, h, qh);
  MatrixX<Scalar> g =
      qh.cwiseProduct(cv) - cache.P.cwiseProduct(cv) + inst.lambda * cv.cwiseSign();
  RowVectorX<Scalar> ud = column_dots(u, d);
  RowVectorX<Scalar> gd = column_dots(g, d);
  RowVectorX<Scalar> gu = column_dots(g, u);
  const Scalar dphi =
      (gd.array() * inv.array() - gu.array() * ud.array() * inv.array().cube()).sum();
  return {alpha, std::move(c), f, std::move(g), dphi};
}

template <typename Scalar>
struct LineSearchOutcome {
  ObliquePoint<Scalar> point;
  Scalar f;
  MatrixX<Scalar> eucl_grad;
  Scalar alpha;
  bool wolfe_ok;
};

}  // namespace detail

// Conjugate-gradient iterate plus everything the next line search reuses.
template <typename Scalar>
struct RcgState {
  ObliquePoint<Scalar> point;
  MatrixX<Scalar> grad;       // Riemannian gradient at point
  MatrixX<Scalar> direction;  // search direction, tangent at point
  Scalar beta{0};             // conjugacy coefficient behind direction
  Scalar f_value{0};
  Scalar slope{0};            // <grad, direction>_F, negative for a descent direction
  Scalar alpha_prev{1};       // warm start for the next line search
  bool converged{false};
};

namespace detail {

// Wolfe search along state.direction: quadratic interpolation on an Armijo
// failure, expansion/bisection on a curvature failure, capped at
// cfg.rcg_max_evals evaluations. Without a Wolfe point the lowest-f trial
// wins if it improves on the start; otherwise the search stays put, so the
// objective never increases across a line search.
template <typename Scalar>
LineSearchOutcome<Scalar> wolfe_line_search(const ProblemInstance<Scalar>& inst,
                                            const GramCache<Scalar>& cache,
                                            const RcgState<Scalar>& state,
                                            const SolverConfig& cfg) {
  const MatrixX<Scalar>& a = state.point.values();
  const MatrixX<Scalar>& d = state.direction;
  const Scalar f0 = state.f_value;
  const Scalar s0 = state.slope;

  std::optional<TrialPoint<Scalar>> best;
  Scalar alpha = state.alpha_prev > Scalar(0) ? state.alpha_prev : Scalar(1);
  Scalar lo = 0;
  Scalar hi = std::numeric_limits<Scalar>::infinity();
  for (int evals = 0; evals < cfg.rcg_max_evals; ++evals) {
    std::optional<TrialPoint<Scalar>> trial;
    try {
      trial = eval_trial(inst, cache, a, d, alpha);
    } catch (const ZeroColumnError&) {
      hi = alpha;
      alpha = (lo + alpha) / 2;
      continue;
    }
    if (!std::isfinite(static_cast<double>(trial->f))) {
      hi = alpha;
      alpha = (lo + alpha) / 2;
      continue;
    }
    const Scalar ft = trial->f;
    const Scalar dphit = trial->dphi;
    const Scalar at = trial->alpha;
    if (ft <= f0 + Scalar(cfg.rcg_c1) * at * s0) {
      if (dphit >= Scalar(cfg.rcg_c2) * s0) {
        return {std::move(trial->point), ft, std::move(trial->eucl_grad), at, true};
      }
      if (!best || ft < best->f) best = std::move(*trial);
      lo = at;
      alpha = std::isfinite(static_cast<double>(hi)) ? (lo + hi) / 2 : 2 * at;
    } else {
      if (!best || ft < best->f) best = std::move(*trial);
      hi = at;
      const Scalar denom = 2 * (ft - f0 - s0 * at);
      const Scalar cand = denom > 0 ? -s0 * at * at / denom : at / 2;
      alpha = std::clamp(cand, Scalar(0.1) * at, Scalar(0.5) * at);
    }
  }
  if (!best || !(best->f <= f0)) {
    return {state.point, f0, euclidean_subgradient(inst, cache, state.point), state.alpha_prev,
            false};
  }
  return {std::move(best->point), best->f, std::move(best->eucl_grad), best->alpha, false};
}

}  // namespace detail

template <typename Scalar>
RcgState<Scalar> rcg_init(const ProblemInstance<Scalar>& inst, const GramCache<Scalar>& cache,
                          const ObliquePoint<Scalar>& a, const SolverConfig& cfg) {
  RcgState<Scalar> s{a};
  const MatrixX<Scalar>& av = a.values();
  MatrixX<Scalar> h = av.cwiseProduct(av);
  MatrixX<Scalar> qh = cache.Q * h;
  s.f_value = detail::objective_quartic_cached(cache, inst.lambda, av, h, qh);
  MatrixX<Scalar> g =
      qh.cwiseProduct(av) - cache.P.cwiseProduct(av) + inst.lambda * av.cwiseSign();
  s.grad = tangent_part(av, g);
  s.direction = -s.grad;
  s.slope = -s.grad.squaredNorm();
  s.converged = s.grad.norm() <= Scalar(cfg.rcg_grad_tol) * (Scalar(1) + cache.P.norm());
  return s;
}

// One conjugate-gradient iteration: Wolfe step along the current direction,
// then the new direction from the hybrid of the two conjugacy rules, with the
// previous direction and gradient carried over by tangent projection at the
// new point. Falls back to steepest descent whenever conjugacy stops giving a
// descent direction.
template <typename Scalar>
RcgState<Scalar> rcg_step(const ProblemInstance<Scalar>& inst, const GramCache<Scalar>& cache,
                          const RcgState<Scalar>& state, const SolverConfig& cfg) {
  if (state.converged) return state;

  detail::LineSearchOutcome<Scalar> ls = detail::wolfe_line_search(inst, cache, state, cfg);

  RcgState<Scalar> next{std::move(ls.point)};
  next.f_value = ls.f;
  next.alpha_prev = ls.alpha > Scalar(0) ? ls.alpha : state.alpha_prev;
  const MatrixX<Scalar>& av = next.point.values();
  next.grad = tangent_part(av, ls.eucl_grad);
  next.converged = next.grad.norm() <= Scalar(cfg.rcg_grad_tol) * (Scalar(1) + cache.P.norm());
  if (next.converged) {
    next.direction = -next.grad;
    next.slope = -next.grad.squaredNorm();
    return next;
  }

  MatrixX<Scalar> td = tangent_part(av, state.direction);
  MatrixX<Scalar> y = next.grad - tangent_part(av, state.grad);
  const Scalar gg = next.grad.squaredNorm();
  const Scalar dy = detail::frob_dot(td, y);
  Scalar beta = 0;
  const Scalar guard = Scalar(1e-14) * std::max(Scalar(1), td.norm() * y.norm());
  if (std::abs(dy) > guard) {
    const Scalar beta_dy = gg / dy;
    const Scalar beta_hs = detail::frob_dot(next.grad, y) / dy;
    beta = std::max(Scalar(0), std::min(beta_dy, beta_hs));
  }
  next.beta = beta;
  next.direction = -next.grad + beta * td;
  next.slope = detail::frob_dot(next.grad, next.direction);
  if (!(next.slope < Scalar(0))) {
    next.beta = 0;
    next.direction = -next.grad;
    next.slope = -gg;
  }
  return next;
}

struct TracePoint {
  double t_seconds;
  double f_value;
};

template <typename Scalar>
struct SolverTrace {
  Method method{Method::Rmu};
  std::vector<TracePoint> points;  // front() records the initial objective at t = 0
  MatrixX<Scalar> h_last;
  long iterations{0};
  bool converged{false};
  std::string error;  // empty when the run ended cleanly
};

// Shared benchmark loop. Each iteration times the step alone (two clock reads
// around it; recording stays outside the window), then records the common
// objective on the method's current feasible H. Exits at k_max iterations or
// once accumulated time passes t_max, whichever comes first. A step error
// ends the run gracefully with the trace so far.
template <typename Scalar>
SolverTrace<Scalar> run_solver(Method method, const ProblemInstance<Scalar>& inst,
                               const GramCache<Scalar>& cache, const MatrixX<Scalar>& h_init,
                               const SolverConfig& cfg, Clock& clock) {
  cfg.validate();
  if (h_init.rows() != inst.r() || h_init.cols() != inst.n()) {
    throw DimensionMismatchError("run_solver: H_init must be r x n");
  }
  require_simplex_columns(h_init, kSimplexFeasTol, "run_solver H_init");

  SolverTrace<Scalar> trace;
  trace.method = method;
  trace.points.push_back(
      {0.0, static_cast<double>(detail::objective_nssls_cached(cache, inst.lambda, h_init))});

  MatrixX<Scalar> h = h_init;
  std::optional<ObliquePoint<Scalar>> a;
  std::optional<RcgState<Scalar>> rcg;
  try {
    if (method == Method::Rmu) {
      a = lift_to_oblique(h_init);
      h = hadamard_square(*a);
    } else if (method == Method::Rcg) {
      rcg = rcg_init(inst, cache, lift_to_oblique(h_init), cfg);
      h = hadamard_square(rcg->point);
    }
  } catch (const Error& e) {
    trace.error = e.what();
    trace.h_last = std::move(h);
    return trace;
  }

  double elapsed = 0.0;
  for (long k = 1; k <= cfg.k_max; ++k) {
    if (rcg && rcg->converged) break;
    const double t0 = clock.now_seconds();
    try {
      switch (method) {
        case Method::Rmu:
          a = rmu_step(inst, cache, *a, cfg);
          break;
        case Method::Rcg:
          *rcg = rcg_step(inst, cache, *rcg, cfg);
          break;
        case Method::EmuProj:
          h = emu_step(inst, cache, h, cfg);
          break;
        case Method::SparseMuProj:
          h = sparsemu_step(inst, cache, h, cfg);
          break;
      }
    } catch (const Error& e) {
      trace.error = e.what();
      break;
    }
    double dt = clock.now_seconds() - t0;
    if (!(dt > 0)) dt = 1e-9;  // keep t strictly increasing on coarse clocks
    elapsed += dt;
    if (method == Method::Rmu) {
      h = hadamard_square(*a);
    } else if (method == Method::Rcg) {
      h = hadamard_square(rcg->point);
    }
    trace.points.push_back(
        {elapsed, static_cast<double>(detail::objective_nssls_cached(cache, inst.lambda, h))});
    trace.iterations = k;
    if (elapsed > cfg.t_max_seconds) break;
  }
  trace.converged = rcg.has_value() && rcg->converged;
  trace.h_last = std::move(h);
  return trace;
}

}  // namespace rmu
