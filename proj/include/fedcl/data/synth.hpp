#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcl/data/raw_series.hpp"

namespace fedcl {

/// One generated numeric column:
///   level + seasonal_amp * (sin(2*pi*t/period + client_phase + phase) + client_offset + drift * t/period)
///         + daily_amp * sin(2*pi*hour/24 + phase) + noise * noise_scale * N(0, 1)
/// with t in days since the start.
struct SynthFeature {
  std::string name;
  double level = 0.0;
  double seasonal_amp = 1.0;
  double daily_amp = 0.0;
  double phase = 0.0;
  double noise = 0.0;

  friend bool operator==(const SynthFeature&, const SynthFeature&) = default;
};

struct SynthConfig {
  int num_clients = 2;
  int days = 280;
  std::string start = "2013-03-01";
  double season_period_days = 365.25;
  /// Global multiplier on every feature's noise.
  double noise_scale = 1.0;
  /// Per-client phase of the seasonal component, radians. Missing entries are 0.
  std::vector<double> client_phase_offsets;
  /// Per-client level offset in units of each feature's seasonal amplitude.
  std::vector<double> client_offsets;
  /// Level drift per seasonal period, in units of seasonal amplitude.
  double drift_per_period = 0.0;
  /// Wind direction jitter (degrees, scaled by noise_scale).
  double wind_noise_deg = 20.0;
  /// Empty means default_synth_features().
  std::vector<SynthFeature> features;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Columns of the station CSV layout with rough magnitudes for each.
std::vector<SynthFeature> default_synth_features();

/// One series per client (stations "S00", "S01", ...), hourly over `days`
/// days, with a 16-point compass wind direction column "wd". Deterministic per seed.
std::vector<RawSeries> synth_generate(const SynthConfig& config, std::uint64_t seed);

}  // namespace fedcl
