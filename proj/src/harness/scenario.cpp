#include "fedcl/harness/scenario.hpp"

#include "fedcl/errors.hpp"
#include "fedcl/log.hpp"

namespace fedcl {

Scenario load_scenario(const ExperimentConfig& config) {
  Scenario s;
  s.schedule = build_schedule(config.schedule);
  std::vector<RawSeries> raw;
  if (config.data.kind == DataSource::Kind::csv) {
    CsvSchema schema;
    schema.allowed_stations = config.data.stations;
    raw = ingest_csv_dir(config.data.csv_dir, schema);
  } else {
    raw = synth_generate(config.data.synth, config.data.synth_seed);
  }
  if (raw.empty()) throw IngestionError("no stations found", 0);
  for (const auto& r : raw) {
    if (r.rows() == 0) throw IngestionError("station " + r.station + " has no rows", 0);
    check_coverage(s.schedule, r.times.front(), r.times.back() + 1);
    s.stations.push_back(impute(r));
  }
  log::info("loaded " + std::to_string(s.stations.size()) + " stations");
  return s;
}

TargetData prepare_target(const Scenario& scenario, const ExperimentConfig& config, const std::string& target) {
  EncodeOptions enc;
  enc.target_column = target;
  enc.include_season = config.include_season;
  const TimeRange span = scenario.schedule.span();

  std::vector<FeatureMatrix> matrices;
  for (const auto& st : scenario.stations) matrices.push_back(encode_features(st, enc).slice(span.begin, span.end));
  ScalerParams scaler = fit_scaler(matrices);

  std::vector<std::vector<TaskSplit>> splits(matrices.size());
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const FeatureMatrix scaled = apply_scaler(matrices[k], scaler);
    for (std::size_t t = 0; t <= scenario.schedule.num_tasks(); ++t)
      splits[k].push_back(window_task(scaled, scenario.schedule.range(t), config.window, static_cast<int>(k),
                                      static_cast<int>(t)));
  }
  const std::size_t width = input_width(matrices.front(), config.window);
  return TargetData{target, width, std::move(scaler), InMemoryProvider(std::move(splits))};
}

}  // namespace fedcl
