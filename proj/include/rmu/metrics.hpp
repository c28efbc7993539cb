#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "rmu/errors.hpp"
#include "rmu/solvers.hpp"
#include "rmu/types.hpp"

namespace rmu {

inline constexpr double kSparsityThreshold = 1e-9;

struct AucResult {
  Method method{Method::Rmu};
  double auc_value{0};
  double t_horizon{0};
};

// Trapezoid area under the recorded objective on [0, t_horizon]. Segments
// crossing the horizon are cut by linear interpolation; a trace ending early
// holds its last objective constant out to the horizon.
template <typename Scalar>
AucResult auc(const SolverTrace<Scalar>& trace, double t_horizon) {
  if (trace.points.empty()) throw EmptyTraceError("auc: trace has no points");
  if (!(t_horizon > 0)) throw ConfigError("auc: t_horizon must be > 0");
  double area = 0.0;
  double prev_t = trace.points.front().t_seconds;
  double prev_f = trace.points.front().f_value;
  for (std::size_t i = 1; i < trace.points.size() && prev_t < t_horizon; ++i) {
    double t = trace.points[i].t_seconds;
    double f = trace.points[i].f_value;
    if (t > t_horizon) {
      const double w = (t_horizon - prev_t) / (t - prev_t);
      f = prev_f + w * (f - prev_f);
      t = t_horizon;
    }
    area += 0.5 * (prev_f + f) * (t - prev_t);
    prev_t = t;
    prev_f = f;
  }
  if (prev_t < t_horizon) area += prev_f * (t_horizon - prev_t);
  return {trace.method, area, t_horizon};
}

// What the per-run ranking looks at: one entry per method of the run.
struct MethodRunScore {
  Method method{Method::Rmu};
  double auc_value{0};
  double final_f{0};
};

// Placements 1..k by ascending AUC, ties broken by smaller final objective,
// then by fixed method order. placement[i] belongs to scores[i].
inline std::vector<int> rank_methods(const std::vector<MethodRunScore>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].auc_value != scores[b].auc_value) {
      return scores[a].auc_value < scores[b].auc_value;
    }
    if (scores[a].final_f != scores[b].final_f) return scores[a].final_f < scores[b].final_f;
    return static_cast<int>(scores[a].method) < static_cast<int>(scores[b].method);
  });
  std::vector<int> placement(scores.size());
  for (std::size_t p = 0; p < order.size(); ++p) {
    placement[order[p]] = static_cast<int>(p) + 1;
  }
  return placement;
}

template <typename Scalar>
double sparsity_percent(const MatrixX<Scalar>& h, double threshold = kSparsityThreshold) {
  if (h.size() == 0) throw DimensionMismatchError("sparsity_percent: empty matrix");
  const Eigen::Index zeros = (h.cwiseAbs().array() <= Scalar(threshold)).count();
  return 100.0 * static_cast<double>(zeros) / static_cast<double>(h.size());
}

// Closed-form cost model for one iteration as a function of factor rank r
// and column count n. The totals drive the deterministic clock and the
// cross-method comparisons, so they are frozen constants of the benchmark,
// not measurements to be tuned per machine.
inline long long flops_per_iteration(Method method, long long r, long long n) {
  if (r < 1 || n < 1) throw ConfigError("flops_per_iteration: r, n must be >= 1");
  switch (method) {
    case Method::EmuProj:
      return (2 * r * r + 8 * r - 1) * n;
    case Method::SparseMuProj:
      return (2 * r * r + 6 * r - 1) * n;
    case Method::Rmu:
      return (2 * r * r + 24 * r) * n;
    case Method::Rcg:
      return (16 * r * r + 74 * r) * n;
  }
  throw ConfigError("flops_per_iteration: unknown method");
}

// count[i] = number of runs in which the method placed (i+1)-th.
struct RankTally {
  std::array<long, 4> count{};
};

struct RunSummary {
  Method method{Method::Rmu};
  long runs{0};
  double mean_final_f{0};
  double std_final_f{0};  // sample (n-1) standard deviation; 0 for a single run
  RankTally tally{};
  double median_sparsity_pct{0};
  double mean_auc{0};
};

// Scores of one run: parallel vectors over that run's methods, plus the
// placements among them.
struct RunScores {
  std::vector<MethodRunScore> scores;
  std::vector<double> sparsity_pct;
  std::vector<int> placement;
};

template <typename Scalar>
RunScores score_run(const std::vector<SolverTrace<Scalar>>& traces, double t_horizon,
                    double sparsity_threshold = kSparsityThreshold) {
  RunScores rs;
  for (const SolverTrace<Scalar>& tr : traces) {
    if (tr.points.empty()) throw EmptyTraceError("score_run: a trace has no points");
    rs.scores.push_back({tr.method, auc(tr, t_horizon).auc_value, tr.points.back().f_value});
    rs.sparsity_pct.push_back(sparsity_percent(tr.h_last, sparsity_threshold));
  }
  rs.placement = rank_methods(rs.scores);
  return rs;
}

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  if (k == 0) return 0.0;
  // even count: midpoint of the two central values
  return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace detail

// Fold per-run scores into one row per method. Every run must cover the same
// methods in the same order.
inline std::vector<RunSummary> aggregate_scores(const std::vector<RunScores>& runs) {
  if (runs.empty()) throw EmptyTraceError("aggregate_scores: no runs to aggregate");
  const std::size_t k = runs.front().scores.size();
  for (const RunScores& rs : runs) {
    if (rs.scores.size() != k || rs.sparsity_pct.size() != k || rs.placement.size() != k) {
      throw DimensionMismatchError("aggregate_scores: runs cover different method sets");
    }
  }

  std::vector<RunSummary> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Method method = runs.front().scores[i].method;
    RunSummary& row = out[i];
    row.method = method;
    row.runs = static_cast<long>(runs.size());
    double sum_f = 0.0, sum_auc = 0.0;
    std::vector<double> sparsities;
    sparsities.reserve(runs.size());
    for (const RunScores& rs : runs) {
      if (rs.scores[i].method != method) {
        throw DimensionMismatchError("aggregate_scores: method order differs across runs");
      }
      sum_f += rs.scores[i].final_f;
      sum_auc += rs.scores[i].auc_value;
      sparsities.push_back(rs.sparsity_pct[i]);
      const int place = rs.placement[i];
      if (place < 1 || place > 4) throw ConfigError("aggregate_scores: placement out of range");
      ++row.tally.count[static_cast<std::size_t>(place - 1)];
    }
    const double n = static_cast<double>(runs.size());
    row.mean_final_f = sum_f / n;
    row.mean_auc = sum_auc / n;
    double ss = 0.0;
    for (const RunScores& rs : runs) {
      const double d = rs.scores[i].final_f - row.mean_final_f;
      ss += d * d;
    }
    row.std_final_f = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    row.median_sparsity_pct = detail::median(std::move(sparsities));
  }
  return out;
}

template <typename Scalar>
std::vector<RunSummary> summarize_campaign(
    const std::vector<std::vector<SolverTrace<Scalar>>>& runs, double t_horizon,
    double sparsity_threshold = kSparsityThreshold) {
  std::vector<RunScores> scored;
  scored.reserve(runs.size());
  for (const std::vector<SolverTrace<Scalar>>& run : runs) {
    scored.push_back(score_run(run, t_horizon, sparsity_threshold));
  }
  return aggregate_scores(scored);
}

}  // namespace rmu
