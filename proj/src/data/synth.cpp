#include "fedcl/data/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace {

constexpr std::array<const char*, 16> kCompass{"N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE",
                                               "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW"};

double at_or_zero(const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : 0.0; }

}  // namespace

std::vector<SynthFeature> default_synth_features() {
  const double pi = std::numbers::pi;
  return {
      {"PM2.5", 80.0, 30.0, 10.0, pi, 25.0},  {"PM10", 100.0, 30.0, 10.0, pi, 30.0},
      {"SO2", 15.0, 10.0, 2.0, pi, 5.0},      {"NO2", 50.0, 10.0, 8.0, pi, 10.0},
      {"CO", 1200.0, 500.0, 150.0, pi, 300.0}, {"O3", 55.0, 35.0, 25.0, 0.0, 15.0},
      {"TEMP", 13.0, 14.0, 4.0, 0.0, 1.5},    {"PRES", 1010.0, 10.0, 2.0, pi, 2.0},
      {"DEWP", 2.0, 14.0, 2.0, 0.0, 2.0},     {"RAIN", 0.1, 0.1, 0.05, 0.0, 0.3},
      {"WSPM", 1.8, 0.4, 0.6, pi, 0.5},
  };
}

std::vector<RawSeries> synth_generate(const SynthConfig& config, std::uint64_t seed) {
  if (config.num_clients < 1 || config.days < 1) {
    throw ConfigError("synthetic data needs at least one client and one day");
  }
  if (!(config.season_period_days > 0.0)) throw ConfigError("season period must be positive");
  const auto features = config.features.empty() ? default_synth_features() : config.features;
  const HourStamp start = parse_date(config.start);
  const std::size_t rows = static_cast<std::size_t>(config.days) * 24;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<RawSeries> out;
  for (int k = 0; k < config.num_clients; ++k) {
    // Distinct, reproducible stream per client.
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(k) * 7919ULL + 17ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double client_phase = at_or_zero(config.client_phase_offsets, static_cast<std::size_t>(k));
    const double client_offset = at_or_zero(config.client_offsets, static_cast<std::size_t>(k));

    RawSeries s;
    char name[16];
    std::snprintf(name, sizeof name, "S%02d", k);
    s.station = name;
    for (const auto& f : features) s.numeric_columns.push_back(f.name);
    s.categorical_columns = {"wd"};
    s.times.resize(rows);
    s.numeric.assign(features.size(), std::vector<std::optional<double>>(rows));
    s.categorical.assign(1, std::vector<std::optional<std::string>>(rows));

    for (std::size_t r = 0; r < rows; ++r) {
      const HourStamp t = start + static_cast<HourStamp>(r);
      s.times[r] = t;
      const double days = static_cast<double>(r) / 24.0;
      const double cycles = days / config.season_period_days;
      const int hour = static_cast<int>(r % 24);
      for (std::size_t c = 0; c < features.size(); ++c) {
        const SynthFeature& f = features[c];
        double v = f.level +
                   f.seasonal_amp * (std::sin(two_pi * cycles + client_phase + f.phase) +
                                     client_offset + config.drift_per_period * cycles) +
                   f.daily_amp * std::sin(two_pi * hour / 24.0 + f.phase);
        if (f.noise != 0.0 && config.noise_scale != 0.0) {
          v += f.noise * config.noise_scale * normal(rng);
        }
        s.numeric[c][r] = v;
      }
      double deg = 360.0 * cycles + client_phase * 180.0 / std::numbers::pi +
                   30.0 * std::sin(two_pi * hour / 24.0);
      if (config.noise_scale != 0.0) deg += config.wind_noise_deg * config.noise_scale * normal(rng);
      deg = std::fmod(deg, 360.0);
      if (deg < 0) deg += 360.0;
      const auto sector = static_cast<std::size_t>(std::lround(deg / 22.5)) % kCompass.size();
      s.categorical[0][r] = std::string(kCompass[sector]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fedcl
