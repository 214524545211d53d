#include "fedcl/harness/config.hpp"

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include "fedcl/errors.hpp"
#include "fedcl/log.hpp"

namespace fedcl {

namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!j_.contains(key)) return fallback;
    return take<T>(key);
  }

  template <class T>
  T required(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError("missing required key '" + where(key) + "'");
    return take<T>(key);
  }

  Reader child(const std::string& key) {
    used_.insert(key);
    static const json empty = json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, where(key));
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (auto it = j_.begin(); it != j_.end(); ++it) out.push_back(it.key());
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError("unknown key '" + where(it.key()) + "'");
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  template <class T>
  T take(const std::string& key) {
    used_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("key '" + where(key) + "' has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

const std::vector<std::string> kWeighted{"Replay", "LwF", "EWC", "OEWC", "SI"};

bool weighted(Method m) {
  return m != Method::static_model && m != Method::naive;
}

SynthFeature read_feature(Reader r) {
  SynthFeature f;
  f.name = r.required<std::string>("name");
  f.level = r.get("level", f.level);
  f.seasonal_amp = r.get("seasonal_amp", f.seasonal_amp);
  f.daily_amp = r.get("daily_amp", f.daily_amp);
  f.phase = r.get("phase", f.phase);
  f.noise = r.get("noise", f.noise);
  r.finish();
  return f;
}

SynthConfig read_synth(Reader r) {
  SynthConfig s;
  s.num_clients = r.get("num_clients", s.num_clients);
  s.days = r.get("days", s.days);
  s.start = r.get("start", s.start);
  s.season_period_days = r.get("season_period_days", s.season_period_days);
  s.noise_scale = r.get("noise_scale", s.noise_scale);
  s.client_phase_offsets = r.get("client_phase_offsets", s.client_phase_offsets);
  s.client_offsets = r.get("client_offsets", s.client_offsets);
  s.drift_per_period = r.get("drift_per_period", s.drift_per_period);
  s.wind_noise_deg = r.get("wind_noise_deg", s.wind_noise_deg);
  if (r.has("features")) {
    const json& fs = r.raw("features");
    if (!fs.is_array()) throw ConfigError("key '" + r.where("features") + "' must be an array");
    for (std::size_t i = 0; i < fs.size(); ++i)
      s.features.push_back(read_feature(Reader(fs[i], r.where("features") + "[" + std::to_string(i) + "]")));
  } else {
    s.features = default_synth_features();
  }
  r.finish();
  if (s.num_clients < 1 || s.days < 1 || !(s.season_period_days > 0.0) || !(s.noise_scale >= 0.0))
    throw ConfigError("data.synth: num_clients, days and season_period_days must be positive");
  return s;
}

json synth_to_json(const SynthConfig& s) {
  json fs = json::array();
  for (const auto& f : s.features)
    fs.push_back({{"name", f.name},
                  {"level", f.level},
                  {"seasonal_amp", f.seasonal_amp},
                  {"daily_amp", f.daily_amp},
                  {"phase", f.phase},
                  {"noise", f.noise}});
  return {{"num_clients", s.num_clients},
          {"days", s.days},
          {"start", s.start},
          {"season_period_days", s.season_period_days},
          {"noise_scale", s.noise_scale},
          {"client_phase_offsets", s.client_phase_offsets},
          {"client_offsets", s.client_offsets},
          {"drift_per_period", s.drift_per_period},
          {"wind_noise_deg", s.wind_noise_deg},
          {"features", fs}};
}

}  // namespace

std::map<std::string, std::map<std::string, double>> default_weights() {
  return {{"LwF", {{"TEMP", 30.0}, {"PM2.5", 60.0}, {"WSPM", 120.0}}},
          {"SI", {{"TEMP", 3.0}, {"PM2.5", 12.0}, {"WSPM", 14.0}}},
          {"Replay", {{"TEMP", 0.6}, {"PM2.5", 0.7}, {"WSPM", 0.8}}},
          {"OEWC", {{"TEMP", 0.8e6}, {"PM2.5", 1.5e6}, {"WSPM", 1.3e6}}},
          {"EWC", {{"TEMP", 1e10}, {"PM2.5", 1e6}, {"WSPM", 1e8}}}};
}

std::map<std::string, double> default_replay_ratios() {
  return {{"TEMP", 0.15}, {"PM2.5", 0.20}, {"WSPM", 0.25}};
}

MethodParams ExperimentConfig::method_params(Method m, const std::string& target) const {
  MethodParams p;
  p.method = m;
  if (weighted(m)) p.weight = weights.at(method_name(m)).at(target);
  if (m == Method::replay) p.replay_ratio = replay_ratio.at(target);
  p.gamma = gamma;
  p.xi = xi;
  p.fisher_batches = fisher_batches;
  p.fisher_scale = fisher_scale;
  return p;
}

FedConfig ExperimentConfig::fed_config(Method m, const std::string& target, std::size_t input_dim) const {
  FedConfig f;
  f.model.input_dim = input_dim;
  f.model.hidden_dim = hidden_dim;
  f.model.num_layers = num_layers;
  f.model.lag = window.lag;
  f.model.horizon = window.horizon;
  f.optimizer = optimizer;
  f.batch_size = batch_size;
  f.local_epochs = local_epochs;
  f.base_rounds = base_rounds;
  f.task_rounds = task_rounds;
  f.method = method_params(m, target);
  f.evaluate_upper = evaluate_upper;
  return f;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Reader root(j, "");

  {
    Reader d = root.child("data");
    if (!root.has("data")) throw ConfigError("missing required key 'data'");
    const std::string source = d.required<std::string>("source");
    if (source == "csv") {
      c.data.kind = DataSource::Kind::csv;
      c.data.csv_dir = d.required<std::string>("csv_dir");
      c.data.stations = d.get("stations", c.data.stations);
    } else if (source == "synthetic") {
      c.data.kind = DataSource::Kind::synthetic;
      c.data.synth = read_synth(d.child("synth"));
      c.data.synth_seed = d.get("seed", c.data.synth_seed);
    } else {
      throw ConfigError("key 'data.source' must be \"csv\" or \"synthetic\"");
    }
    d.finish();
  }

  c.targets = root.get("targets", c.targets);
  if (c.targets.empty()) throw ConfigError("key 'targets' must list at least one target");
  std::vector<std::string> method_names;
  for (Method m : all_methods()) method_names.push_back(method_name(m));
  method_names = root.get("methods", method_names);
  for (const auto& name : method_names) c.methods.push_back(parse_method(name));
  if (c.methods.empty()) throw ConfigError("key 'methods' must list at least one method");

  {
    Reader s = root.child("schedule");
    const std::string mode = s.get<std::string>("mode", "meteorological");
    if (mode == "meteorological") c.schedule.mode = ScheduleConfig::Mode::meteorological;
    else if (mode == "fixed_days") c.schedule.mode = ScheduleConfig::Mode::fixed_days;
    else throw ConfigError("key 'schedule.mode' must be \"meteorological\" or \"fixed_days\"");
    c.schedule.start = s.get("start", c.schedule.start);
    c.schedule.base_months = s.get("base_months", c.schedule.base_months);
    c.schedule.base_days = s.get("base_days", c.schedule.base_days);
    c.schedule.season_days = s.get("season_days", c.schedule.season_days);
    c.schedule.num_tasks = s.get("num_tasks", c.schedule.num_tasks);
    s.finish();
    try {
      build_schedule(c.schedule);
    } catch (const ScheduleError& e) {
      throw ConfigError(std::string("schedule: ") + e.what());
    }
  }
  {
    Reader w = root.child("window");
    c.window.lag = w.get("lag", c.window.lag);
    c.window.horizon = w.get("horizon", c.window.horizon);
    c.window.train_fraction = w.get("train_fraction", c.window.train_fraction);
    c.window.target_as_input = w.get("target_as_input", c.window.target_as_input);
    c.include_season = w.get("include_season", c.include_season);
    w.finish();
    if (c.window.lag == 0 || c.window.horizon == 0) throw ConfigError("window.lag and window.horizon must be positive");
    if (!(c.window.train_fraction > 0.0 && c.window.train_fraction < 1.0))
      throw ConfigError("window.train_fraction must lie in (0, 1)");
  }
  {
    Reader m = root.child("model");
    c.hidden_dim = m.get("hidden_dim", c.hidden_dim);
    c.num_layers = m.get("num_layers", c.num_layers);
    m.finish();
  }
  {
    Reader t = root.child("training");
    c.base_rounds = t.get("base_rounds", c.base_rounds);
    c.task_rounds = t.get("task_rounds", c.task_rounds);
    c.local_epochs = t.get("local_epochs", c.local_epochs);
    c.batch_size = t.get("batch_size", c.batch_size);
    Reader o = t.child("optimizer");
    const std::string kind = o.get<std::string>("kind", "adam");
    if (kind == "adam") c.optimizer.kind = OptimizerConfig::Kind::adam;
    else if (kind == "sgd") c.optimizer.kind = OptimizerConfig::Kind::sgd;
    else throw ConfigError("key 'training.optimizer.kind' must be \"adam\" or \"sgd\"");
    c.optimizer.lr = o.get("lr", c.optimizer.lr);
    c.optimizer.beta1 = o.get("beta1", c.optimizer.beta1);
    c.optimizer.beta2 = o.get("beta2", c.optimizer.beta2);
    c.optimizer.eps = o.get("eps", c.optimizer.eps);
    o.finish();
    t.finish();
  }
  {
    Reader h = root.child("hyper");
    c.weights = default_weights();
    if (h.has("lambda")) {
      Reader l = h.child("lambda");
      for (const auto& key : l.keys()) {
        const std::string canon = method_name(parse_method(key));
        if (!weighted(parse_method(key))) throw ConfigError("key 'hyper.lambda." + key + "': method has no strength");
        Reader per = l.child(key);
        for (const auto& target : per.keys()) c.weights[canon][target] = per.required<double>(target);
        per.finish();
      }
      l.finish();
    }
    c.replay_ratio = default_replay_ratios();
    if (h.has("replay_ratio")) {
      Reader r = h.child("replay_ratio");
      for (const auto& target : r.keys()) c.replay_ratio[target] = r.required<double>(target);
      r.finish();
    }
    c.gamma = h.get("gamma", c.gamma);
    c.xi = h.get("xi", c.xi);
    c.fisher_batches = h.get("fisher_batches", c.fisher_batches);
    c.fisher_scale = h.get("fisher_scale", c.fisher_scale);
    h.finish();
  }

  c.seeds = root.get("seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("key 'seeds' must not be empty");
  c.output_dir = root.get<std::string>("output_dir", c.output_dir.string());
  c.report_scale = root.get("report_scale", c.report_scale);
  c.evaluate_upper = root.get("evaluate_upper", c.evaluate_upper);
  root.finish();

  for (Method m : c.methods) {
    for (const auto& target : c.targets) {
      if (weighted(m) && !(c.weights.count(method_name(m)) && c.weights[method_name(m)].count(target)))
        throw ConfigError("missing required key 'hyper.lambda." + method_name(m) + "." + target + "'");
      if (m == Method::replay && !c.replay_ratio.count(target))
        throw ConfigError("missing required key 'hyper.replay_ratio." + target + "'");
      c.fed_config(m, target, 1).validate();
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " does not parse: " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const ExperimentConfig& c) {
  json data;
  if (c.data.kind == DataSource::Kind::csv) {
    data = {{"source", "csv"}, {"csv_dir", c.data.csv_dir.string()}, {"stations", c.data.stations}};
  } else {
    data = {{"source", "synthetic"}, {"synth", synth_to_json(c.data.synth)}, {"seed", c.data.synth_seed}};
  }
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(method_name(m));
  return {
      {"data", data},
      {"targets", c.targets},
      {"methods", methods},
      {"schedule",
       {{"mode", c.schedule.mode == ScheduleConfig::Mode::meteorological ? "meteorological" : "fixed_days"},
        {"start", c.schedule.start},
        {"base_months", c.schedule.base_months},
        {"base_days", c.schedule.base_days},
        {"season_days", c.schedule.season_days},
        {"num_tasks", c.schedule.num_tasks}}},
      {"window",
       {{"lag", c.window.lag},
        {"horizon", c.window.horizon},
        {"train_fraction", c.window.train_fraction},
        {"target_as_input", c.window.target_as_input},
        {"include_season", c.include_season}}},
      {"model", {{"hidden_dim", c.hidden_dim}, {"num_layers", c.num_layers}}},
      {"training",
       {{"base_rounds", c.base_rounds},
        {"task_rounds", c.task_rounds},
        {"local_epochs", c.local_epochs},
        {"batch_size", c.batch_size},
        {"optimizer",
         {{"kind", c.optimizer.kind == OptimizerConfig::Kind::adam ? "adam" : "sgd"},
          {"lr", c.optimizer.lr},
          {"beta1", c.optimizer.beta1},
          {"beta2", c.optimizer.beta2},
          {"eps", c.optimizer.eps}}}}},
      {"hyper",
       {{"lambda", c.weights},
        {"replay_ratio", c.replay_ratio},
        {"gamma", c.gamma},
        {"xi", c.xi},
        {"fisher_batches", c.fisher_batches},
        {"fisher_scale", c.fisher_scale}}},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir.string()},
      {"report_scale", c.report_scale},
      {"evaluate_upper", c.evaluate_upper},
  };
}

void apply_env_overrides(ExperimentConfig& c) {
  if (const char* dir = std::getenv("FEDCL_OUTPUT_DIR"); dir && *dir) c.output_dir = dir;
  if (const char* threads = std::getenv("FEDCL_THREADS"); threads && *threads) {
    char* end = nullptr;
    const long n = std::strtol(threads, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError("FEDCL_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
    log::info("using " + std::to_string(n) + " threads");
  }
}

}  // namespace fedcl
