#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmu/metrics.hpp"
#include "rmu/solvers.hpp"
#include "rmu/synthetic.hpp"

namespace rmu {

// One config file = one experiment: the dataset tuple, the Monte-Carlo count,
// the solver caps, and where the artifacts go. Run i draws its dataset from
// seed + i, so any subset of runs is reproducible on its own.
struct CampaignConfig {
  DatasetSpec dataset;
  long runs = 1;
  long k_max = 1000;
  double t_max_seconds = 5.0;
  double epsilon_floor = 1e-16;
  std::vector<Method> methods{Method::Rmu, Method::Rcg, Method::EmuProj, Method::SparseMuProj};
  std::optional<double> lambda_override;
  std::filesystem::path out_dir = "out";
  bool parallel_runs = false;
  bool deterministic_clock = false;
  double seconds_per_flop = 1e-6;  // deterministic clock: virtual seconds per modeled FLOP
  double sparsity_threshold = kSparsityThreshold;

  void validate() const;
};

CampaignConfig parse_campaign_config_text(const std::string& text);
CampaignConfig parse_campaign_config(const std::filesystem::path& file);

struct MethodRunRecord {
  Method method{Method::Rmu};
  double initial_f{0};
  double final_f{0};
  double auc_value{0};
  double sparsity_pct{0};
  long iterations{0};
  int placement{0};  // 0 when the run failed before ranking
  bool converged{false};
  std::string error;
};

struct RunRecord {
  long index{0};
  std::uint64_t seed{0};
  double lambda{0};
  bool failed{false};
  std::string error;
  std::vector<MethodRunRecord> methods;
};

struct CampaignResult {
  std::vector<RunRecord> runs;
  std::vector<RunSummary> summary;  // over runs that completed cleanly
  std::filesystem::path out_dir;
  long runs_completed{0};
  long runs_failed{0};
};

// Execute the campaign and write out_dir/traces/run_*.csv,
// out_dir/h_last/run_*_<method>.csv, out_dir/summary.csv and
// out_dir/manifest.txt. Per-run failures are recorded and skipped in the
// summary; the campaign keeps going.
CampaignResult run_campaign(const CampaignConfig& cfg);

// Rebuild the summary rows from the files run_campaign wrote. Byte-identical
// summary.csv for the same inputs, since both paths share the scoring and
// formatting code.
std::vector<RunSummary> summarize_from_dir(const std::filesystem::path& dir,
                                           std::optional<double> t_horizon = std::nullopt);

void write_summary_csv(const std::filesystem::path& path, const std::vector<RunSummary>& rows);

std::string software_version();

}  // namespace rmu
