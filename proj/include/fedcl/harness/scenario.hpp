#pragma once

#include <string>
#include <vector>

#include "fedcl/data/preprocess.hpp"
#include "fedcl/data/raw_series.hpp"
#include "fedcl/fed/provider.hpp"
#include "fedcl/harness/config.hpp"

namespace fedcl {

/// Imputed station series (one per client) and the task schedule they cover.
struct Scenario {
  std::vector<RawSeries> stations;
  TaskSchedule schedule;
};

/// Reads the CSV directory or generates synthetic stations, imputes them and
/// checks that every station covers the schedule.
Scenario load_scenario(const ExperimentConfig& config);

struct TargetData {
  std::string target;
  std::size_t input_dim = 0;
  ScalerParams scaler;
  InMemoryProvider provider;
};

/// Encodes, scales (fitted on all stations inside the schedule) and windows
/// every station for one forecasting target.
TargetData prepare_target(const Scenario& scenario, const ExperimentConfig& config, const std::string& target);

}  // namespace fedcl
