#include "rmu/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "rmu/clock.hpp"
#include "rmu/errors.hpp"
#include "rmu/init.hpp"
#include "rmu/io.hpp"

namespace rmu {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// key = value lines, one per line; '#' starts a comment; later duplicates win.
std::map<std::string, std::string> parse_flat(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = lower(trim(std::string_view(t).substr(0, eq)));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    kv[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

long long parse_int(const std::string& v, const char* key) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(std::string("config: ") + key + " must be an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& v, const char* key) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(std::string("config: ") + key + " must be a nonnegative integer, got '" +
                      v + "'");
  }
  return out;
}

double parse_real(const std::string& v, const char* key) {
  double out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(std::string("config: ") + key + " must be a number, got '" + v + "'");
  }
  return out;
}

bool parse_flag(const std::string& v, const char* key) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(std::string("config: ") + key + " must be a boolean, got '" + v + "'");
}

std::vector<Method> parse_method_list(const std::string& v) {
  std::vector<Method> out;
  std::string token;
  std::istringstream in(v);
  while (std::getline(in, token, ',')) {
    const std::string name = trim(token);
    if (name.empty()) continue;
    const std::optional<Method> m = parse_method(name);
    if (!m) throw ConfigError("config: unknown method '" + name + "'");
    if (std::find(out.begin(), out.end(), *m) != out.end()) {
      throw ConfigError("config: method '" + name + "' listed twice");
    }
    out.push_back(*m);
  }
  if (out.empty()) throw ConfigError("config: methods list is empty");
  return out;
}

std::string run_tag(long index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "run_%03ld", index);
  return buf;
}

std::string method_list_string(const std::vector<Method>& methods) {
  std::string s;
  for (const Method m : methods) {
    if (!s.empty()) s += ", ";
    s += method_name(m);
  }
  return s;
}

void write_run_files(const fs::path& out_dir, long index,
                     const std::vector<SolverTrace<double>>& traces) {
  const std::string tag = run_tag(index);
  const fs::path trace_path = out_dir / "traces" / (tag + ".csv");
  std::ofstream out(trace_path);
  if (!out) throw IoError("run_campaign: cannot open " + trace_path.string());
  out << "run,method,k,t_seconds,F\n";
  std::string line;
  const std::string run_str = std::to_string(index);
  for (const SolverTrace<double>& tr : traces) {
    const std::string prefix = run_str + "," + method_name(tr.method) + ",";
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
      line.assign(prefix);
      line += std::to_string(k);
      line.push_back(',');
      line += format_double(tr.points[k].t_seconds);
      line.push_back(',');
      line += format_double(tr.points[k].f_value);
      line.push_back('\n');
      out << line;
    }
  }
  out.flush();
  if (!out) throw IoError("run_campaign: write failed for " + trace_path.string());
  for (const SolverTrace<double>& tr : traces) {
    write_matrix_csv(out_dir / "h_last" / (tag + "_" + std::string(method_name(tr.method)) + ".csv"),
                     tr.h_last);
  }
}

void write_manifest(const fs::path& path, const CampaignConfig& cfg,
                    const CampaignResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("run_campaign: cannot open " + path.string());
  out << "# campaign manifest: config echo plus everything needed to reproduce\n";
  out << "# summary.csv with this binary (deterministic clock mode is exact;\n";
  out << "# wall-clock timings vary by host)\n";
  out << "version = " << software_version() << '\n';
  out << "prng = mt19937_64; double = (x >> 11) * 2^-53; stream order W_true, H_true, zero "
         "mask, E\n";
  out << "per_run_seed = seed + run_index\n";
  out << "m = " << cfg.dataset.m << '\n';
  out << "n = " << cfg.dataset.n << '\n';
  out << "r = " << cfg.dataset.r << '\n';
  out << "zero_fraction = " << format_double(cfg.dataset.zero_fraction) << '\n';
  out << "sigma = " << format_double(cfg.dataset.sigma) << '\n';
  out << "seed = " << cfg.dataset.seed << '\n';
  out << "runs = " << cfg.runs << '\n';
  out << "k_max = " << cfg.k_max << '\n';
  out << "t_max = " << format_double(cfg.t_max_seconds) << '\n';
  out << "epsilon_floor = " << format_double(cfg.epsilon_floor) << '\n';
  out << "methods = " << method_list_string(cfg.methods) << '\n';
  out << "lambda_override = "
      << (cfg.lambda_override ? format_double(*cfg.lambda_override) : std::string("auto"))
      << '\n';
  out << "parallel_runs = " << (cfg.parallel_runs ? "true" : "false") << '\n';
  out << "deterministic_clock = " << (cfg.deterministic_clock ? "true" : "false") << '\n';
  out << "seconds_per_flop = " << format_double(cfg.seconds_per_flop) << '\n';
  out << "sparsity_threshold = " << format_double(cfg.sparsity_threshold) << '\n';
  out << "clock = "
      << (cfg.deterministic_clock
              ? "deterministic; per-iteration quantum = modeled FLOPs * seconds_per_flop"
              : "steady wall clock")
      << '\n';
  out << "clock_resolution_ns = " << format_double(WallClock::resolution_seconds() * 1e9)
      << '\n';
  out << "runs_completed = " << result.runs_completed << '\n';
  out << "runs_failed = " << result.runs_failed << '\n';
  std::string failed;
  for (const RunRecord& rec : result.runs) {
    if (rec.failed) {
      if (!failed.empty()) failed += ", ";
      failed += std::to_string(rec.index);
    }
  }
  out << "failed_runs = " << failed << '\n';
  out.flush();
  if (!out) throw IoError("run_campaign: write failed for " + path.string());
}

}  // namespace

void CampaignConfig::validate() const {
  dataset.validate();
  if (runs < 1) throw ConfigError("CampaignConfig: runs must be >= 1");
  if (methods.empty()) throw ConfigError("CampaignConfig: methods must be nonempty");
  if (k_max < 1) throw ConfigError("CampaignConfig: k_max must be >= 1");
  if (!(t_max_seconds > 0)) throw ConfigError("CampaignConfig: t_max must be > 0");
  if (!(epsilon_floor > 0)) throw ConfigError("CampaignConfig: epsilon_floor must be > 0");
  if (!(seconds_per_flop > 0)) throw ConfigError("CampaignConfig: seconds_per_flop must be > 0");
  if (!(sparsity_threshold >= 0)) {
    throw ConfigError("CampaignConfig: sparsity_threshold must be >= 0");
  }
  if (out_dir.empty()) throw ConfigError("CampaignConfig: out_dir must be set");
}

CampaignConfig parse_campaign_config_text(const std::string& text) {
  const std::map<std::string, std::string> kv = parse_flat(text);
  CampaignConfig cfg;
  bool have_m = false, have_n = false, have_r = false;
  for (const auto& [key, value] : kv) {
    if (key == "m") {
      cfg.dataset.m = parse_int(value, "m");
      have_m = true;
    } else if (key == "n") {
      cfg.dataset.n = parse_int(value, "n");
      have_n = true;
    } else if (key == "r") {
      cfg.dataset.r = parse_int(value, "r");
      have_r = true;
    } else if (key == "zero_fraction" || key == "s" || key == "sparsity") {
      cfg.dataset.zero_fraction = parse_real(value, key.c_str());
    } else if (key == "sigma") {
      cfg.dataset.sigma = parse_real(value, "sigma");
    } else if (key == "seed") {
      cfg.dataset.seed = parse_uint(value, "seed");
    } else if (key == "runs") {
      cfg.runs = parse_int(value, "runs");
    } else if (key == "k_max") {
      cfg.k_max = parse_int(value, "k_max");
    } else if (key == "t_max") {
      cfg.t_max_seconds = parse_real(value, "t_max");
    } else if (key == "epsilon_floor") {
      cfg.epsilon_floor = parse_real(value, "epsilon_floor");
    } else if (key == "methods") {
      cfg.methods = parse_method_list(value);
    } else if (key == "lambda_override" || key == "lambda") {
      if (lower(value) != "auto") cfg.lambda_override = parse_real(value, key.c_str());
    } else if (key == "out_dir") {
      if (value.empty()) throw ConfigError("config: out_dir must not be empty");
      cfg.out_dir = value;
    } else if (key == "parallel_runs") {
      cfg.parallel_runs = parse_flag(value, "parallel_runs");
    } else if (key == "deterministic_clock") {
      cfg.deterministic_clock = parse_flag(value, "deterministic_clock");
    } else if (key == "seconds_per_flop") {
      cfg.seconds_per_flop = parse_real(value, "seconds_per_flop");
    } else if (key == "sparsity_threshold") {
      cfg.sparsity_threshold = parse_real(value, "sparsity_threshold");
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  if (!have_m || !have_n || !have_r) {
    throw ConfigError("config: m, n and r are required");
  }
  cfg.validate();
  return cfg;
}

CampaignConfig parse_campaign_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_campaign_config_text(ss.str());
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<RunSummary>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("write_summary_csv: cannot open " + path.string());
  out << "method,mean_F,std_F,rank1,rank2,rank3,rank4,median_sparsity_pct,mean_auc\n";
  for (const RunSummary& r : rows) {
    out << method_name(r.method) << ',' << format_double(r.mean_final_f) << ','
        << format_double(r.std_final_f) << ',' << r.tally.count[0] << ',' << r.tally.count[1]
        << ',' << r.tally.count[2] << ',' << r.tally.count[3] << ','
        << format_double(r.median_sparsity_pct) << ',' << format_double(r.mean_auc) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write_summary_csv: write failed for " + path.string());
}

std::string software_version() { return "rmu-bench 0.1.0"; }

CampaignResult run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir / "traces");
  fs::create_directories(cfg.out_dir / "h_last");

  CampaignResult result;
  result.out_dir = cfg.out_dir;
  result.runs.resize(static_cast<std::size_t>(cfg.runs));
  std::vector<std::optional<RunScores>> scored(static_cast<std::size_t>(cfg.runs));

  const auto execute_run = [&cfg, &result, &scored](long i) {
    RunRecord rec;
    rec.index = i;
    rec.seed = cfg.dataset.seed + static_cast<std::uint64_t>(i);
    try {
      DatasetSpec dspec = cfg.dataset;
      dspec.seed = rec.seed;
      Dataset<double> data = generate<double>(dspec);
      InitBundle<double> init = make_init_bundle<double>(data.X, dspec.r, cfg.lambda_override);
      rec.lambda = init.lambda;
      ProblemInstance<double> inst(std::move(data.X), init.W_init, init.lambda);
      GramCache<double> cache(inst);
      SolverConfig scfg;
      scfg.k_max = cfg.k_max;
      scfg.t_max_seconds = cfg.t_max_seconds;
      scfg.epsilon_floor = cfg.epsilon_floor;

      std::vector<SolverTrace<double>> traces;
      traces.reserve(cfg.methods.size());
      for (const Method m : cfg.methods) {
        if (cfg.deterministic_clock) {
          DeterministicClock clock(
              static_cast<double>(flops_per_iteration(m, dspec.r, dspec.n)) *
              cfg.seconds_per_flop);
          traces.push_back(run_solver(m, inst, cache, init.H_init, scfg, clock));
        } else {
          WallClock clock;
          traces.push_back(run_solver(m, inst, cache, init.H_init, scfg, clock));
        }
      }
      write_run_files(cfg.out_dir, i, traces);

      for (const SolverTrace<double>& tr : traces) {
        if (!tr.error.empty()) {
          rec.failed = true;
          rec.error = std::string(method_name(tr.method)) + ": " + tr.error;
          break;
        }
      }
      std::optional<RunScores> rs;
      if (!rec.failed) rs = score_run(traces, cfg.t_max_seconds, cfg.sparsity_threshold);
      for (std::size_t mi = 0; mi < traces.size(); ++mi) {
        const SolverTrace<double>& tr = traces[mi];
        MethodRunRecord mr;
        mr.method = tr.method;
        mr.initial_f = tr.points.front().f_value;
        mr.final_f = tr.points.back().f_value;
        mr.iterations = tr.iterations;
        mr.converged = tr.converged;
        mr.error = tr.error;
        if (rs) {
          mr.auc_value = rs->scores[mi].auc_value;
          mr.sparsity_pct = rs->sparsity_pct[mi];
          mr.placement = rs->placement[mi];
        }
        rec.methods.push_back(std::move(mr));
      }
      scored[static_cast<std::size_t>(i)] = std::move(rs);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    result.runs[static_cast<std::size_t>(i)] = std::move(rec);
  };

  if (cfg.parallel_runs && cfg.runs > 1) {
    // opt-in and timing-distorting: concurrent runs share cores, so wall-clock
    // AUC numbers are only comparable within a sequential campaign
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const long workers = std::min<long>(cfg.runs, static_cast<long>(hw));
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (long w = 0; w < workers; ++w) {
      pool.emplace_back([&cfg, &next, &execute_run] {
        for (;;) {
          const long i = next.fetch_add(1);
          if (i >= cfg.runs) return;
          execute_run(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  } else {
    for (long i = 0; i < cfg.runs; ++i) execute_run(i);
  }

  std::vector<RunScores> ok;
  ok.reserve(scored.size());
  for (std::optional<RunScores>& s : scored) {
    if (s) ok.push_back(std::move(*s));
  }
  result.runs_completed = static_cast<long>(ok.size());
  result.runs_failed = cfg.runs - result.runs_completed;
  if (!ok.empty()) result.summary = aggregate_scores(ok);
  write_summary_csv(cfg.out_dir / "summary.csv", result.summary);
  write_manifest(cfg.out_dir / "manifest.txt", cfg, result);
  return result;
}

std::vector<RunSummary> summarize_from_dir(const std::filesystem::path& dir,
                                           std::optional<double> t_horizon) {
  double horizon = 0;
  double sparsity_threshold = kSparsityThreshold;
  std::set<long> failed;
  const fs::path manifest = dir / "manifest.txt";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::map<std::string, std::string> kv = parse_flat(ss.str());
    if (const auto it = kv.find("t_max"); it != kv.end()) {
      horizon = parse_real(it->second, "t_max");
    }
    if (const auto it = kv.find("sparsity_threshold"); it != kv.end()) {
      sparsity_threshold = parse_real(it->second, "sparsity_threshold");
    }
    if (const auto it = kv.find("failed_runs"); it != kv.end() && !it->second.empty()) {
      std::istringstream fin(it->second);
      std::string token;
      while (std::getline(fin, token, ',')) {
        const std::string t = trim(token);
        if (!t.empty()) failed.insert(parse_int(t, "failed_runs"));
      }
    }
  }
  if (t_horizon) horizon = *t_horizon;
  if (!(horizon > 0)) {
    throw ConfigError("summarize: horizon unknown; no manifest t_max and no override given");
  }

  const fs::path tdir = dir / "traces";
  if (!fs::exists(tdir)) throw IoError("summarize: no traces directory under " + dir.string());
  std::vector<fs::path> files;
  for (const fs::directory_entry& e : fs::directory_iterator(tdir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<RunScores> scored;
  for (const fs::path& f : files) {
    const std::string tag = f.stem().string();
    if (tag.rfind("run_", 0) == 0) {
      const long run_index = parse_int(tag.substr(4), "trace file index");
      if (failed.count(run_index) > 0) continue;
    }

    std::ifstream in(f);
    if (!in) throw IoError("summarize: cannot open " + f.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("summarize: empty trace file " + f.string());
    std::vector<SolverTrace<double>> traces;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::vector<std::string_view> fields = split_csv_line(line);
      if (fields.size() != 5) throw IoError("summarize: bad trace row in " + f.string());
      const std::string mname(fields[1]);
      if (traces.empty() || method_name(traces.back().method) != mname) {
        const std::optional<Method> m = parse_method(mname);
        if (!m) throw IoError("summarize: unknown method '" + mname + "' in " + f.string());
        if (!seen.insert(mname).second) {
          throw IoError("summarize: method '" + mname + "' appears twice in " + f.string());
        }
        traces.emplace_back();
        traces.back().method = *m;
      }
      traces.back().points.push_back({parse_double(fields[3]), parse_double(fields[4])});
    }
    if (traces.empty()) throw IoError("summarize: no rows in " + f.string());
    for (SolverTrace<double>& tr : traces) {
      tr.iterations = static_cast<long>(tr.points.size()) - 1;
      tr.h_last = read_matrix_csv(dir / "h_last" /
                                  (tag + "_" + std::string(method_name(tr.method)) + ".csv"));
    }
    scored.push_back(score_run(traces, horizon, sparsity_threshold));
  }
  if (scored.empty()) throw EmptyTraceError("summarize: no usable runs under " + dir.string());
  return aggregate_scores(scored);
}

}  // namespace rmu
