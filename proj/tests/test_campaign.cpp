#include <gtest/gtest.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rmu/campaign.hpp"
#include "rmu/errors.hpp"

namespace fs = std::filesystem;
using rmu::Method;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() /
             ("rmu_test_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

rmu::CampaignConfig tiny_config(const fs::path& out_dir) {
  rmu::CampaignConfig cfg;
  cfg.dataset = {12, 16, 3, 0.3, 0.0, 42};
  cfg.runs = 2;
  cfg.k_max = 5;
  cfg.t_max_seconds = 5.0;
  cfg.deterministic_clock = true;
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST(ParseConfig, ReadsKeysCommentsAndAliases) {
  const std::string text =
      "# campaign for the small table\n"
      "m = 12\n"
      "n = 16\n"
      "r = 3\n"
      "s = 0.4  # alias for zero_fraction\n"
      "sigma = 0.01\n"
      "seed = 9\n"
      "runs = 3\n"
      "k_max = 6\n"
      "t_max = 2.5\n"
      "methods = rmu, emu\n"
      "lambda = auto\n"
      "out_dir = somewhere\n"
      "deterministic_clock = true\n"
      "seconds_per_flop = 1e-7\n";
  rmu::CampaignConfig cfg = rmu::parse_campaign_config_text(text);
  EXPECT_EQ(cfg.dataset.m, 12);
  EXPECT_EQ(cfg.dataset.n, 16);
  EXPECT_EQ(cfg.dataset.r, 3);
  EXPECT_DOUBLE_EQ(cfg.dataset.zero_fraction, 0.4);
  EXPECT_DOUBLE_EQ(cfg.dataset.sigma, 0.01);
  EXPECT_EQ(cfg.dataset.seed, 9u);
  EXPECT_EQ(cfg.runs, 3);
  EXPECT_EQ(cfg.k_max, 6);
  EXPECT_DOUBLE_EQ(cfg.t_max_seconds, 2.5);
  EXPECT_EQ(cfg.methods, (std::vector<Method>{Method::Rmu, Method::EmuProj}));
  EXPECT_FALSE(cfg.lambda_override.has_value());
  EXPECT_EQ(cfg.out_dir, fs::path("somewhere"));
  EXPECT_TRUE(cfg.deterministic_clock);
  EXPECT_FALSE(cfg.parallel_runs);
  EXPECT_DOUBLE_EQ(cfg.seconds_per_flop, 1e-7);
}

TEST(ParseConfig, RejectsMalformedInput) {
  EXPECT_THROW(rmu::parse_campaign_config_text("m = 4\nn = 5\n"), rmu::ConfigError);
  EXPECT_THROW(rmu::parse_campaign_config_text("m = 4\nn = 5\nr = 2\nfoo = 1\n"),
               rmu::ConfigError);
  EXPECT_THROW(rmu::parse_campaign_config_text("m = x\nn = 5\nr = 2\n"), rmu::ConfigError);
  EXPECT_THROW(rmu::parse_campaign_config_text("m 4\n"), rmu::ConfigError);
  EXPECT_THROW(rmu::parse_campaign_config_text("m = 4\nn = 5\nr = 2\nmethods = frank\n"),
               rmu::ConfigError);
  EXPECT_THROW(rmu::parse_campaign_config_text("m = 4\nn = 5\nr = 2\nmethods = ,\n"),
               rmu::ConfigError);
  EXPECT_THROW(rmu::parse_campaign_config_text("m = 4\nn = 5\nr = 2\nmethods = rmu, rmu\n"),
               rmu::ConfigError);
  EXPECT_THROW(rmu::parse_campaign_config_text("m = 4\nn = 5\nr = 2\nruns = 0\n"),
               rmu::ConfigError);
  EXPECT_THROW(rmu::parse_campaign_config_text("m = 4\nn = 5\nr = 9\n"),
               rmu::RankTooLargeError);
  // override with a lambda value still parses as a number
  EXPECT_THROW(rmu::parse_campaign_config_text("m = 4\nn = 5\nr = 2\nlambda = abc\n"),
               rmu::ConfigError);
}

TEST(ParseConfig, MissingFileIsAnIoError) {
  EXPECT_THROW(rmu::parse_campaign_config("/nonexistent/rmu.cfg"), rmu::IoError);
}

TEST(RunCampaign, WritesArtifactsAndAggregates) {
  TempDir tmp("artifacts");
  rmu::CampaignConfig cfg = tiny_config(tmp.path / "out");
  rmu::CampaignResult result = rmu::run_campaign(cfg);

  EXPECT_EQ(result.runs_completed, 2);
  EXPECT_EQ(result.runs_failed, 0);
  ASSERT_EQ(result.runs.size(), 2u);
  EXPECT_EQ(result.runs[0].seed, 42u);
  EXPECT_EQ(result.runs[1].seed, 43u);

  for (const rmu::RunRecord& rec : result.runs) {
    ASSERT_EQ(rec.methods.size(), 4u);
    for (const rmu::MethodRunRecord& mr : rec.methods) {
      EXPECT_DOUBLE_EQ(mr.initial_f, rec.methods[0].initial_f);
      EXPECT_TRUE(mr.error.empty());
    }
    std::vector<int> places;
    for (const rmu::MethodRunRecord& mr : rec.methods) places.push_back(mr.placement);
    std::sort(places.begin(), places.end());
    EXPECT_EQ(places, (std::vector<int>{1, 2, 3, 4}));
  }

  ASSERT_EQ(result.summary.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(result.summary[i].method, rmu::kMethodOrder[i]);
    long total = 0;
    for (long c : result.summary[i].tally.count) total += c;
    EXPECT_EQ(total, 2);
  }

  EXPECT_TRUE(fs::exists(cfg.out_dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(cfg.out_dir / "manifest.txt"));
  EXPECT_TRUE(fs::exists(cfg.out_dir / "traces" / "run_000.csv"));
  EXPECT_TRUE(fs::exists(cfg.out_dir / "traces" / "run_001.csv"));
  for (Method m : rmu::kMethodOrder) {
    EXPECT_TRUE(fs::exists(cfg.out_dir / "h_last" /
                           ("run_000_" + std::string(rmu::method_name(m)) + ".csv")));
  }

  // trace accounting: data rows = sum over methods of (iterations + 1)
  std::ifstream in(cfg.out_dir / "traces" / "run_000.csv");
  std::string line;
  long lines = 0;
  while (std::getline(in, line)) ++lines;
  long expect = 0;
  for (const rmu::MethodRunRecord& mr : result.runs[0].methods) expect += mr.iterations + 1;
  EXPECT_EQ(lines, expect + 1);  // header

  const std::string header = slurp(cfg.out_dir / "summary.csv");
  EXPECT_EQ(header.rfind("method,mean_F,std_F,rank1,rank2,rank3,rank4,median_sparsity_pct,"
                         "mean_auc\n",
                         0),
            0u);
}

TEST(RunCampaign, DeterministicClockReproducesByteIdenticalSummaries) {
  TempDir tmp("repro");
  rmu::CampaignConfig cfg = tiny_config(tmp.path / "a");
  rmu::run_campaign(cfg);
  rmu::CampaignConfig cfg2 = tiny_config(tmp.path / "b");
  rmu::run_campaign(cfg2);
  const std::string a = slurp(tmp.path / "a" / "summary.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(tmp.path / "b" / "summary.csv"));
}

TEST(RunCampaign, ParallelRunsMatchSequentialUnderDeterministicClock) {
  TempDir tmp("parallel");
  rmu::CampaignConfig seq = tiny_config(tmp.path / "seq");
  seq.runs = 4;
  rmu::run_campaign(seq);
  rmu::CampaignConfig par = tiny_config(tmp.path / "par");
  par.runs = 4;
  par.parallel_runs = true;
  rmu::run_campaign(par);
  EXPECT_EQ(slurp(tmp.path / "seq" / "summary.csv"), slurp(tmp.path / "par" / "summary.csv"));
  EXPECT_EQ(slurp(tmp.path / "seq" / "traces" / "run_003.csv"),
            slurp(tmp.path / "par" / "traces" / "run_003.csv"));
}

TEST(RunCampaign, SummarizeFromDirMatchesInMemorySummary) {
  TempDir tmp("resummarize");
  rmu::CampaignConfig cfg = tiny_config(tmp.path / "out");
  rmu::CampaignResult result = rmu::run_campaign(cfg);
  std::vector<rmu::RunSummary> rows = rmu::summarize_from_dir(cfg.out_dir);
  ASSERT_EQ(rows.size(), result.summary.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].method, result.summary[i].method);
    EXPECT_EQ(rows[i].mean_final_f, result.summary[i].mean_final_f);
    EXPECT_EQ(rows[i].std_final_f, result.summary[i].std_final_f);
    EXPECT_EQ(rows[i].tally.count, result.summary[i].tally.count);
    EXPECT_EQ(rows[i].median_sparsity_pct, result.summary[i].median_sparsity_pct);
    EXPECT_EQ(rows[i].mean_auc, result.summary[i].mean_auc);
  }

  // a shorter horizon changes the AUC integral
  std::vector<rmu::RunSummary> clipped = rmu::summarize_from_dir(cfg.out_dir, 1e-3);
  EXPECT_NE(clipped[0].mean_auc, rows[0].mean_auc);
}

TEST(RunCampaign, RecordsPerRunFailuresAndKeepsGoing) {
  TempDir tmp("failures");
  rmu::CampaignConfig cfg = tiny_config(tmp.path / "out");
  cfg.lambda_override = -1.0;  // rejected by every run's ProblemInstance
  rmu::CampaignResult result = rmu::run_campaign(cfg);
  EXPECT_EQ(result.runs_completed, 0);
  EXPECT_EQ(result.runs_failed, 2);
  EXPECT_TRUE(result.summary.empty());
  for (const rmu::RunRecord& rec : result.runs) {
    EXPECT_TRUE(rec.failed);
    EXPECT_FALSE(rec.error.empty());
  }
  EXPECT_EQ(slurp(cfg.out_dir / "summary.csv"),
            "method,mean_F,std_F,rank1,rank2,rank3,rank4,median_sparsity_pct,mean_auc\n");
  const std::string manifest = slurp(cfg.out_dir / "manifest.txt");
  EXPECT_NE(manifest.find("failed_runs = 0, 1"), std::string::npos);
  EXPECT_THROW(rmu::summarize_from_dir(cfg.out_dir), rmu::EmptyTraceError);
}

TEST(RunCampaign, MethodSubsetProducesMatchingRows) {
  TempDir tmp("subset");
  rmu::CampaignConfig cfg = tiny_config(tmp.path / "out");
  cfg.runs = 1;
  cfg.methods = {Method::Rmu};
  rmu::CampaignResult result = rmu::run_campaign(cfg);
  ASSERT_EQ(result.summary.size(), 1u);
  EXPECT_EQ(result.summary[0].method, Method::Rmu);
  EXPECT_EQ(result.summary[0].tally.count[0], 1);  // only entrant always ranks first
  const std::string trace = slurp(cfg.out_dir / "traces" / "run_000.csv");
  EXPECT_EQ(trace.find("RCG"), std::string::npos);
}

TEST(WriteSummaryCsv, GoldenRow) {
  TempDir tmp("golden");
  rmu::RunSummary row;
  row.method = Method::Rmu;
  row.runs = 2;
  row.mean_final_f = 17.5;
  row.std_final_f = 0.25;
  row.tally.count = {2, 0, 0, 0};
  row.median_sparsity_pct = 62.5;
  row.mean_auc = 88.0;
  rmu::write_summary_csv(tmp.path / "s.csv", {row});
  EXPECT_EQ(slurp(tmp.path / "s.csv"),
            "method,mean_F,std_F,rank1,rank2,rank3,rank4,median_sparsity_pct,mean_auc\n"
            "RMU,17.5,0.25,2,0,0,0,62.5,88\n");
}

TEST(SoftwareVersion, IsNonEmpty) { EXPECT_FALSE(rmu::software_version().empty()); }
