#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "fedcl/eval/metrics.hpp"
#include "fedcl/harness/config.hpp"

namespace fedcl {

enum ExitCode : int { exit_ok = 0, exit_partial_failure = 1, exit_config_error = 2 };

struct RunRecord {
  std::string method;
  std::string target;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::filesystem::path dir;  // relative to the output directory
  MetricsReport metrics;
};

struct MatrixOutcome {
  std::vector<RunRecord> runs;
  std::size_t failed() const;
  int exit_code() const { return failed() == 0 ? exit_ok : exit_partial_failure; }
};

/// Runs every (method, target, seed) cell into config.output_dir:
///   runs/<method>/<target>/seed_<s>/{performance_matrix.csv, metrics.json, rounds.ndjson}
///   runs/<method>/<target>/metrics.json (trials and their mean/std), runs.json, config.json
/// then emits the report. Failed runs are recorded and the rest continue.
MatrixOutcome run_matrix(const ExperimentConfig& config);

/// Applies one swept value to a serialized config. `param` is a dotted path that
/// must exist (e.g. "hyper.replay_ratio.TEMP") or an alias: replay_ratio, lambda,
/// gamma, xi, fisher_scale, lr, batch_size, base_rounds, task_rounds, hidden_dim.
nlohmann::json apply_sweep_value(const nlohmann::json& config, const std::string& param, double value);

/// Runs the config once per value under output_dir/sweep/value_<v>/ and writes
/// output_dir/sweep.csv: param,value,method,target,AF,AP,AP_normalized,AvgPerf
/// (seed means, report-scaled; AP_normalized = AP / min AP over the values).
int run_sweep(const ExperimentConfig& config, const std::string& param, const std::vector<double>& values);

struct ReportSummary {
  std::size_t runs = 0;
  std::size_t failed = 0;
};

/// Reads runs.json and per-run outputs under `results` and writes aggregate.csv,
/// summary.txt, heatmap.csv (long-format P entries) and task_curves.csv.
/// A directory without runs produces an explicit "0 runs" summary.
ReportSummary emit_report(const std::filesystem::path& results);

}  // namespace fedcl
