#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "rmu/errors.hpp"
#include "rmu/rng.hpp"
#include "rmu/solvers.hpp"
#include "rmu/types.hpp"

namespace rmu {

struct DatasetSpec {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Eigen::Index r = 0;
  double zero_fraction = 0.0;  // fraction of H_true entries forced to zero
  double sigma = 0.0;          // noise scale
  std::uint64_t seed = 0;

  void validate() const {
    if (m < 1 || n < 1 || r < 1) throw ConfigError("DatasetSpec: m, n, r must be >= 1");
    if (r > std::min(m, n)) throw RankTooLargeError("DatasetSpec: r must be <= min(m, n)");
    if (!(zero_fraction >= 0.0) || !(zero_fraction < 1.0)) {
      throw ConfigError("DatasetSpec: zero_fraction must be in [0, 1)");
    }
    if (!(sigma >= 0.0)) throw ConfigError("DatasetSpec: sigma must be >= 0");
    const long long target = std::llround(zero_fraction * static_cast<double>(r) *
                                          static_cast<double>(n));
    if (target > static_cast<long long>(n) * (r - 1)) {
      throw InfeasibleSparsityError("DatasetSpec: zero target would empty a column");
    }
  }
};

template <typename Scalar>
struct Dataset {
  MatrixX<Scalar> X;       // m x n, nonnegative
  MatrixX<Scalar> W_true;  // m x r
  MatrixX<Scalar> H_true;  // r x n, column-stochastic
};

namespace detail {

// C(r, k) for k = 0..r-1 (k = r is excluded on purpose: a fully zeroed column
// is never allowed).
inline std::vector<double> binom_row(Eigen::Index r) {
  std::vector<double> c(static_cast<std::size_t>(r));
  double v = 1.0;
  for (Eigen::Index k = 0; k < r; ++k) {
    c[static_cast<std::size_t>(k)] = v;
    v = v * static_cast<double>(r - k) / static_cast<double>(k + 1);
  }
  return c;
}

// p(k) proportional to C(r,k) * exp(k * log_theta), normalized in log space.
inline std::vector<double> tilted_pmf(const std::vector<double>& binom, double log_theta) {
  std::vector<double> p(binom.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < binom.size(); ++k) {
    p[k] = std::log(binom[k]) + static_cast<double>(k) * log_theta;
    mx = std::max(mx, p[k]);
  }
  double norm = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    norm += v;
  }
  for (double& v : p) v /= norm;
  return p;
}

inline double pmf_mean(const std::vector<double>& p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) acc += static_cast<double>(k) * p[k];
  return acc;
}

}  // namespace detail

// Uniformly random r x n boolean mask with exactly round(target * r * n) true
// entries and at least one false entry in every column.
//
// Sampling goes in two exact stages: first the per-column zero counts
// (k_1..k_n), whose conditional law given the total is proportional to
// prod_j C(r, k_j); then a uniform k_j-subset of rows within each column.
// The counts are drawn i.i.d. from an exponentially tilted copy of that
// weight (tilt chosen so the mean matches the target) and rejected until
// they hit the total exactly; tilting cancels under the conditioning, so
// accepted draws are exactly uniform, and centering the mean makes the
// rejection cheap where a naive global resample would practically never
// terminate.
inline MaskX zero_mask(Rng& rng, Eigen::Index r, Eigen::Index n, double target_zero_fraction) {
  if (r < 1 || n < 1) throw ConfigError("zero_mask: r, n must be >= 1");
  if (!(target_zero_fraction >= 0.0) || !(target_zero_fraction < 1.0)) {
    throw ConfigError("zero_mask: target fraction must be in [0, 1)");
  }
  const long long z =
      std::llround(target_zero_fraction * static_cast<double>(r) * static_cast<double>(n));
  const long long z_max = static_cast<long long>(n) * (r - 1);
  if (z > z_max) {
    throw InfeasibleSparsityError("zero_mask: zero target would empty a column");
  }

  MaskX mask = MaskX::Constant(r, n, false);
  if (z == 0) return mask;

  std::vector<long> counts(static_cast<std::size_t>(n), 0);
  if (z == z_max) {
    std::fill(counts.begin(), counts.end(), static_cast<long>(r - 1));
  } else {
    const std::vector<double> binom = detail::binom_row(r);
    const double mu = static_cast<double>(z) / static_cast<double>(n);
    double lo = -700.0, hi = 700.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (detail::pmf_mean(detail::tilted_pmf(binom, mid)) < mu) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const std::vector<double> pmf = detail::tilted_pmf(binom, 0.5 * (lo + hi));
    std::vector<double> cdf(pmf.size());
    std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
    cdf.back() = 1.0;

    bool accepted = false;
    for (long attempt = 0; attempt < 100000 && !accepted; ++attempt) {
      long long total = 0;
      for (std::size_t j = 0; j < counts.size(); ++j) {
        const double u = rng.next_double();
        const std::size_t k = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        counts[j] = static_cast<long>(std::min(k, pmf.size() - 1));
        total += counts[j];
      }
      accepted = total == z;
    }
    if (!accepted) {
      throw Error("zero_mask: count sampling did not hit the target (should not happen)");
    }
  }

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(r));
  for (Eigen::Index j = 0; j < n; ++j) {
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const long k = counts[static_cast<std::size_t>(j)];
    for (long t = 0; t < k; ++t) {
      const std::uint64_t pick =
          static_cast<std::uint64_t>(t) + rng.next_below(static_cast<std::uint64_t>(r - t));
      std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(pick)]);
      mask(idx[static_cast<std::size_t>(t)], j) = true;
    }
  }
  return mask;
}

// X = W_true * H_true + sigma * E, all ingredients uniform on [0,1] from one
// seeded stream in the fixed order W_true, H_true, mask, E. H_true is masked
// to the zero target, then column-normalized, so the planted solution is
// itself feasible.
template <typename Scalar>
Dataset<Scalar> generate(const DatasetSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  Dataset<Scalar> ds;
  ds.W_true.resize(spec.m, spec.r);
  for (Eigen::Index j = 0; j < spec.r; ++j) {
    for (Eigen::Index i = 0; i < spec.m; ++i) {
      ds.W_true(i, j) = static_cast<Scalar>(rng.next_double());
    }
  }

  // 1 - u lands in (0, 1]: entries that survive the mask stay strictly positive
  MatrixX<Scalar> h(spec.r, spec.n);
  for (Eigen::Index j = 0; j < spec.n; ++j) {
    for (Eigen::Index i = 0; i < spec.r; ++i) {
      h(i, j) = static_cast<Scalar>(1.0 - rng.next_double());
    }
  }

  const MaskX mask = zero_mask(rng, spec.r, spec.n, spec.zero_fraction);
  for (Eigen::Index j = 0; j < spec.n; ++j) {
    for (Eigen::Index i = 0; i < spec.r; ++i) {
      if (mask(i, j)) h(i, j) = Scalar(0);
    }
  }
  ds.H_true = project_simplex_columns(h);

  ds.X = ds.W_true * ds.H_true;
  if (spec.sigma > 0) {
    MatrixX<Scalar> e(spec.m, spec.n);
    for (Eigen::Index j = 0; j < spec.n; ++j) {
      for (Eigen::Index i = 0; i < spec.m; ++i) {
        e(i, j) = static_cast<Scalar>(rng.next_double());
      }
    }
    ds.X += static_cast<Scalar>(spec.sigma) * e;
  }
  return ds;
}

}  // namespace rmu
