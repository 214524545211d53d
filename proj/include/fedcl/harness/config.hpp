#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedcl/core/optimizer.hpp"
#include "fedcl/data/schedule.hpp"
#include "fedcl/data/synth.hpp"
#include "fedcl/data/windowing.hpp"
#include "fedcl/fed/experiment.hpp"

namespace fedcl {

struct DataSource {
  enum class Kind { csv, synthetic };
  Kind kind = Kind::csv;
  std::filesystem::path csv_dir;
  /// Empty accepts every station found.
  std::vector<std::string> stations;
  SynthConfig synth;
  std::uint64_t synth_seed = 7;
};

struct ExperimentConfig {
  DataSource data;
  std::vector<std::string> targets{"TEMP", "PM2.5", "WSPM"};
  std::vector<Method> methods;
  ScheduleConfig schedule;
  WindowOptions window;
  bool include_season = false;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 1;
  std::size_t base_rounds = 500;
  std::size_t task_rounds = 30;
  std::size_t local_epochs = 1;
  std::size_t batch_size = 64;
  OptimizerConfig optimizer;
  /// weights[method][target]: strength of the method's extra loss term.
  std::map<std::string, std::map<std::string, double>> weights;
  std::map<std::string, double> replay_ratio;
  double gamma = 0.9;
  double xi = 1e-3;
  std::size_t fisher_batches = 32;
  double fisher_scale = 1.0;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path output_dir = "results";
  /// Multiplier applied to AF/AP/AvgPerf in aggregate tables.
  double report_scale = 1e3;
  bool evaluate_upper = true;

  /// Parameters for one (method, target) cell.
  MethodParams method_params(Method m, const std::string& target) const;
  /// Federation settings for one cell; `input_dim` comes from the encoded data.
  FedConfig fed_config(Method m, const std::string& target, std::size_t input_dim) const;
};

/// Per-method strengths and replay ratios tuned for the station dataset targets.
std::map<std::string, std::map<std::string, double>> default_weights();
std::map<std::string, double> default_replay_ratios();

/// Validates and fills defaults. Unknown keys, bad types and missing
/// per-target hyperparameters raise ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included; config_from_json(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& c);

/// FEDCL_OUTPUT_DIR replaces output_dir; FEDCL_THREADS sets the OpenMP thread count.
void apply_env_overrides(ExperimentConfig& c);

}  // namespace fedcl
