// bench: run seeded solver experiments, parameter sweeps, and slope fits.
// Exit codes: 0 success, 2 config/usage error, 3 invariant violation.

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sppa/bench.hpp"

namespace {

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool all_monitors_pass(const sppa::RunSummary& s) {
  for (const auto& [name, mo] : s.monitors)
    if (!mo.pass) return false;
  return true;
}

int run_command(const std::string& config_path, long iters_override,
                long restart_override, const std::string& out_override) {
  sppa::ExperimentConfig cfg = sppa::load_config(config_path);
  if (iters_override >= 0) cfg.iters = iters_override;
  if (restart_override >= 0) cfg.restart_every = restart_override;
  if (!out_override.empty()) cfg.out = out_override;

  sppa::ExperimentResult res = sppa::run_experiment(cfg);
  std::cout << sppa::summary_to_json(res.summary) << "\n";
  if (!all_monitors_pass(res.summary)) {
    for (const auto& [name, mo] : res.summary.monitors)
      if (!mo.pass)
        std::cerr << "invariant violated: " << name << " at k=" << mo.worst_k
                  << " (slack " << mo.worst_slack << ")\n";
    return 3;
  }
  return 0;
}

int sweep_command(const std::string& config_path, const std::string& param,
                  const std::string& values_csv) {
  sppa::ExperimentConfig cfg = sppa::load_config(config_path);
  std::vector<std::string> values = split_values(values_csv);
  std::vector<sppa::ExperimentResult> results = sppa::sweep(cfg, param, values);
  for (const auto& r : results) std::cout << sppa::summary_to_json(r.summary) << "\n";
  std::cout << sppa::sweep_table(param, values, results);
  for (const auto& r : results)
    if (!all_monitors_pass(r.summary)) return 3;
  return 0;
}

int slope_command(const std::string& trace_path, const std::string& metric) {
  std::vector<sppa::TraceRecord> trace = sppa::read_trace_csv(trace_path);
  double slope = sppa::fit_slope(trace, metric);
  std::printf("%.17g\n", slope);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symplectic proximal point benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_override, param, values_csv, trace_path;
  std::string metric = "residual_sq";
  long iters_override = -1, restart_override = -1;

  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "JSON experiment config")->required();
  run->add_option("--iters", iters_override, "Override iteration count");
  run->add_option("--restart", restart_override, "Override restart period (0 = never)");
  run->add_option("--out", out_override, "Trace CSV output path");

  CLI::App* sw = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sw->add_option("--config", config_path, "JSON experiment config")->required();
  sw->add_option("--param", param, "Swept parameter (C, r, rho, iters, restart_every, seed)")
      ->required();
  sw->add_option("--values", values_csv, "Comma-separated values")->required();

  CLI::App* sl = app.add_subcommand("slope", "Fit a log-log slope to a trace metric");
  sl->add_option("--trace", trace_path, "Trace CSV produced by run")->required();
  sl->add_option("--metric", metric, "Metric column to fit (default residual_sq)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (run->parsed()) return run_command(config_path, iters_override,
                                          restart_override, out_override);
    if (sw->parsed()) return sweep_command(config_path, param, values_csv);
    return slope_command(trace_path, metric);
  } catch (const sppa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  }
}
