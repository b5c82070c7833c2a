#pragma once

// Benchmark harness: experiment configuration, solver wiring, rate-bound
// monitors, trace/summary output, sweeps, slope fits, and comparisons.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "sppa/problems.hpp"
#include "sppa/solvers.hpp"

namespace sppa {

/// Raised for malformed configs and CLI usage problems (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string preset;

  std::string problem_kind;  // lasso | basis_pursuit | fused_lasso | matrix_game | quadratic_l1
  Index m = 0;
  Index n = 0;
  std::uint64_t seed = 1;
  double mu = 1.0;
  double mu1 = 0.0;  // 0 means the generator default
  double mu2 = 0.0;

  // salm | alm | sadmm | sadmm_v2 | admm | sdr | dr | spdhg | pdhg |
  // sppa_convex | ppa | sppa_monotone | sppa_yosida | halpern
  std::string solver;
  std::string schedule_name = "constant_index";
  double schedule_param = 1.0;
  double C = 1.0;
  double r = 2.0;
  double rho = 10.0;

  long iters = 1000;
  long restart_every = 0;  // 0 = never
  std::string out;         // trace CSV path; empty = no file
  long reference_budget = 200000;
};

/// Fills a config from a preset name: salm-lasso, sadmm-bp, spdhg-game,
/// sadmm-fused. Unknown preset raises ConfigError.
ExperimentConfig preset_config(const std::string& name);

/// Parses the JSON experiment config; "preset" supplies defaults and other
/// keys override. Unknown keys or wrong types raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct MonitorOutcome {
  bool pass = true;
  double worst_slack = 0.0;  // min over k of (bound - value); < 0 on failure
  long worst_k = -1;
};

struct RunSummary {
  std::string preset;
  std::string solver;
  std::string problem;  // "kind m x n seed s"
  long iters = 0;
  double final_residual_sq = 0.0;
  double slope = 0.0;  // NaN when not enough points to fit
  bool guarantee_mode = true;
  std::map<std::string, MonitorOutcome> monitors;
  std::array<long, 3> crossings = {-1, -1, -1};  // first k with residual <= 1e-4/-6/-8
  double wall_time = 0.0;  // never serialized; replays are bitwise stable
};

struct ExperimentResult {
  RunSummary summary;
  std::vector<TraceRecord> trace;
};

/// Runs one experiment end to end: generates the instance, computes the
/// reference, drives the solver, evaluates the armed rate-bound monitors
/// (guarantee mode: C <= 1 and a valid schedule), writes the trace CSV when
/// cfg.out is set. The BENCH_SEED environment variable overrides cfg.seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// One run per value of the swept parameter ("C", "r", "rho", "iters",
/// "restart_every", "seed"); value "none" for restart_every means 0.
std::vector<ExperimentResult> sweep(const ExperimentConfig& base,
                                    const std::string& param,
                                    const std::vector<std::string>& values);

/// Log-log least-squares slope of a metric over the last half of the trace.
/// metric is one of objective_gap, residual_sq, inner_product, lyapunov.
/// Fewer than 10 usable points raises std::invalid_argument.
double fit_slope(const std::vector<TraceRecord>& trace, const std::string& metric);

struct CompareReport {
  std::array<long, 3> a_crossings;
  std::array<long, 3> b_crossings;
  std::string text;  // one line per threshold naming the earlier run
};

/// Side-by-side first-crossing comparison; the two runs must be on the same
/// problem instance.
CompareReport compare(const RunSummary& a, const RunSummary& b);

/// CSV with header "k,metric,value", one row per recorded metric per step.
void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path);
std::string trace_to_csv(const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(const std::string& path);
std::vector<TraceRecord> trace_from_csv(const std::string& text);

std::string summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const std::string& text);

/// Collated sweep table (CSV): param value, iters, final residual, slope,
/// threshold crossings, monitor verdicts.
std::string sweep_table(const std::string& param, const std::vector<std::string>& values,
                        const std::vector<ExperimentResult>& results);

}  // namespace sppa
