// Command-line front end: run, sweep, synth, report.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "fedcl/data/raw_series.hpp"
#include "fedcl/data/synth.hpp"
#include "fedcl/errors.hpp"
#include "fedcl/harness/config.hpp"
#include "fedcl/harness/runner.hpp"
#include "fedcl/log.hpp"

using namespace fedcl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig load_with_env(const std::string& path) {
  ExperimentConfig c = load_config(path);
  apply_env_overrides(c);
  return c;
}

int cmd_synth(const std::string& config_path, const fs::path& out) {
  const ExperimentConfig c = load_config(config_path);
  if (c.data.kind != DataSource::Kind::synthetic) throw ConfigError("data.source must be \"synthetic\" for synth");
  fs::create_directories(out);
  for (const auto& s : synth_generate(c.data.synth, c.data.synth_seed)) {
    const fs::path file = out / ("synth_" + s.station + ".csv");
    write_csv(file, s);
    std::cout << file.string() << '\n';
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated continual-learning benchmark for multivariate time-series forecasting"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress at debug level");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every method x target x seed in a config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();

  auto* sweep = app.add_subcommand("sweep", "Repeat a config for each value of one parameter");
  std::string param;
  std::vector<double> values;
  sweep->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--param", param, "Dotted config path or alias (replay_ratio, lambda, gamma, xi, ...)")->required();
  sweep->add_option("--values", values, "Values to sweep (comma or space separated)")->required()->delimiter(',');

  auto* synth = app.add_subcommand("synth", "Write the synthetic stations of a config as CSV files");
  std::string out_dir;
  synth->add_option("--config", config_path, "Config with a synthetic data source")->required();
  synth->add_option("--out", out_dir, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Rebuild summary tables from a results directory");
  std::string results_dir;
  report->add_option("--results", results_dir, "Results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config_error;
  }
  log::set_level(verbose ? log::Level::debug : log::Level::info);

  try {
    if (*run) {
      const MatrixOutcome o = run_matrix(load_with_env(config_path));
      std::cout << o.runs.size() - o.failed() << " of " << o.runs.size() << " runs succeeded\n";
      return o.exit_code();
    }
    if (*sweep) return run_sweep(load_with_env(config_path), param, values);
    if (*synth) return cmd_synth(config_path, out_dir);
    if (*report) {
      const ReportSummary s = emit_report(results_dir);
      std::cout << s.runs << " runs, " << s.failed << " failed\n";
      return s.failed == 0 ? exit_ok : exit_partial_failure;
    }
  } catch (const ConfigError& e) {
    log::error(e.what());
    return exit_config_error;
  } catch (const std::exception& e) {
    log::error(e.what());
    return exit_partial_failure;
  }
  return exit_ok;
}
