#include "fedcl/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "fedcl/errors.hpp"
#include "fedcl/harness/scenario.hpp"
#include "fedcl/log.hpp"

namespace fedcl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fmt(const std::optional<double>& v, double scale = 1.0) {
  return v ? fmt(*v * scale) : "NA";
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json metrics_json(const MetricsReport& m) {
  return {{"method", m.method},   {"target", m.target},   {"seed", m.seed},
          {"AF", opt_json(m.af)}, {"AP", opt_json(m.ap)}, {"AvgPerf", opt_json(m.avgperf)},
          {"cpu_seconds", m.cpu_seconds}};
}

MetricsReport metrics_from(const json& j) {
  return MetricsReport{j.at("method").get<std::string>(), j.at("target").get<std::string>(),
                       j.at("seed").get<std::uint64_t>(), opt_from(j.at("AF")),
                       opt_from(j.at("AP")),              opt_from(j.at("AvgPerf")),
                       j.at("cpu_seconds").get<double>()};
}

json aggregate_json(const TrialAggregate& a) {
  json out = json::object();
  for (const auto& [name, stat] : a.metrics)
    out[name] = stat ? json{{"mean", stat->mean}, {"std", stat->std}, {"trials", stat->count}} : json(nullptr);
  return out;
}

fs::path run_dir(const std::string& method, const std::string& target, std::uint64_t seed) {
  return fs::path("runs") / method / target / ("seed_" + std::to_string(seed));
}

// Runs of one (method, target) cell, keeping first-appearance order.
std::vector<std::vector<const RunRecord*>> group_cells(const std::vector<RunRecord>& runs) {
  std::vector<std::vector<const RunRecord*>> cells;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.method, r.target);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      cells.emplace_back();
    }
    cells[it->second].push_back(&r);
  }
  return cells;
}

std::optional<TrialAggregate> cell_aggregate(const std::vector<const RunRecord*>& cell) {
  std::vector<MetricsReport> ok;
  for (const auto* r : cell)
    if (r->ok) ok.push_back(r->metrics);
  if (ok.empty()) return std::nullopt;
  return aggregate_trials(ok);
}

void write_cell_metrics(const fs::path& out, const std::vector<const RunRecord*>& cell) {
  json trials = json::array();
  for (const auto* r : cell)
    if (r->ok) trials.push_back(metrics_json(r->metrics));
  json j{{"method", cell.front()->method}, {"target", cell.front()->target}, {"trials", trials}};
  if (auto agg = cell_aggregate(cell)) j["aggregate"] = aggregate_json(*agg);
  write_text(out / "runs" / cell.front()->method / cell.front()->target / "metrics.json", j.dump(2) + "\n");
}

void write_manifest(const fs::path& out, const ExperimentConfig& config, const std::vector<RunRecord>& runs) {
  json list = json::array();
  for (const auto& r : runs)
    list.push_back({{"method", r.method},
                    {"target", r.target},
                    {"seed", r.seed},
                    {"status", r.ok ? "ok" : "failed"},
                    {"error", r.error},
                    {"dir", r.dir.generic_string()}});
  write_text(out / "runs.json", json{{"report_scale", config.report_scale}, {"runs", list}}.dump(2) + "\n");
}

RunRecord run_one(const ExperimentConfig& config, const TargetData& data, Method method, std::uint64_t seed,
                  const fs::path& out) {
  RunRecord rec{method_name(method), data.target, seed, false, "", run_dir(method_name(method), data.target, seed), {}};
  const fs::path dir = out / rec.dir;
  fs::create_directories(dir);
  std::ofstream rounds(dir / "rounds.ndjson", std::ios::binary);
  const FedConfig fed = config.fed_config(method, data.target, data.input_dim);
  log::info("run " + rec.method + " / " + rec.target + " / seed " + std::to_string(seed));
  ExperimentResult res = run_experiment(fed, data.provider, seed,
                                        [&](const RoundReport& r) { rounds << round_json(r).dump() << '\n'; });
  std::ostringstream matrix;
  res.p.write_csv(matrix);
  write_text(dir / "performance_matrix.csv", matrix.str());
  rec.metrics = make_report(res.p, rec.method, rec.target, seed, res.cpu_seconds);
  write_text(dir / "metrics.json", metrics_json(rec.metrics).dump(2) + "\n");
  rec.ok = true;
  return rec;
}

struct MatrixRow {
  int i, j;
  std::optional<double> v;
};

std::vector<MatrixRow> read_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<MatrixRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    rows.push_back({std::stoi(a), std::stoi(b), c == "NA" ? std::nullopt : std::optional<double>(std::stod(c))});
  }
  return rows;
}

std::string pm(const std::optional<Stat>& s, double scale) {
  if (!s) return "NA";
  return fmt(s->mean * scale, 4) + " ± " + fmt(s->std * scale, 3);
}

}  // namespace

std::size_t MatrixOutcome::failed() const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return !r.ok; }));
}

MatrixOutcome run_matrix(const ExperimentConfig& config) {
  const fs::path out = config.output_dir;
  fs::create_directories(out);
  write_text(out / "config.json", config_to_json(config).dump(2) + "\n");

  MatrixOutcome outcome;
  auto fail_all = [&](const std::string& target, const std::string& why) {
    for (Method m : config.methods)
      for (std::uint64_t s : config.seeds)
        outcome.runs.push_back(RunRecord{method_name(m), target, s, false, why, run_dir(method_name(m), target, s), {}});
  };

  std::optional<Scenario> scenario;
  try {
    scenario = load_scenario(config);
  } catch (const Error& e) {
    log::error(std::string("data could not be loaded: ") + e.what());
    for (const auto& t : config.targets) fail_all(t, e.what());
  }

  if (scenario) {
    for (const auto& target : config.targets) {
      std::optional<TargetData> data;
      try {
        data.emplace(prepare_target(*scenario, config, target));
      } catch (const Error& e) {
        log::error("target " + target + ": " + e.what());
        fail_all(target, e.what());
        continue;
      }
      for (Method m : config.methods) {
        for (std::uint64_t seed : config.seeds) {
          try {
            outcome.runs.push_back(run_one(config, *data, m, seed, out));
          } catch (const std::exception& e) {
            log::error(method_name(m) + " / " + target + " / seed " + std::to_string(seed) + " failed: " + e.what());
            outcome.runs.push_back(RunRecord{method_name(m), target, seed, false, e.what(),
                                             run_dir(method_name(m), target, seed), {}});
          }
        }
      }
    }
  }

  for (const auto& cell : group_cells(outcome.runs)) write_cell_metrics(out, cell);
  write_manifest(out, config, outcome.runs);
  emit_report(out);
  return outcome;
}

json apply_sweep_value(const json& config, const std::string& param, double value) {
  json out = config;
  auto assign = [&](json& slot, const std::string& name) {
    if (slot.is_number_integer() || slot.is_number_unsigned()) {
      if (value != std::floor(value) || value < 0) throw ConfigError("swept value for '" + name + "' must be a nonnegative integer");
      slot = static_cast<std::uint64_t>(value);
    } else if (slot.is_number()) {
      slot = value;
    } else {
      throw ConfigError("swept parameter '" + name + "' is not numeric");
    }
  };
  static const std::map<std::string, std::string> aliases{
      {"gamma", "hyper.gamma"},           {"xi", "hyper.xi"},
      {"fisher_scale", "hyper.fisher_scale"}, {"lr", "training.optimizer.lr"},
      {"batch_size", "training.batch_size"},  {"base_rounds", "training.base_rounds"},
      {"task_rounds", "training.task_rounds"}, {"hidden_dim", "model.hidden_dim"}};

  if (param == "replay_ratio") {
    for (auto& [target, v] : out["hyper"]["replay_ratio"].items()) assign(v, "replay_ratio." + target);
    return out;
  }
  if (param == "lambda") {
    for (const auto& m : out.at("methods")) {
      auto& per = out["hyper"]["lambda"];
      if (!per.contains(m.get<std::string>())) continue;
      for (auto& [target, v] : per[m.get<std::string>()].items()) assign(v, "lambda." + target);
    }
    return out;
  }
  const auto alias = aliases.find(param);
  const std::string path = alias == aliases.end() ? param : alias->second;
  json* slot = &out;
  std::istringstream parts(path);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (!slot->is_object() || !slot->contains(part)) throw ConfigError("swept parameter '" + param + "' does not exist");
    slot = &(*slot)[part];
  }
  assign(*slot, param);
  return out;
}

int run_sweep(const ExperimentConfig& config, const std::string& param, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const json base = config_to_json(config);
  struct Row {
    double value;
    std::string method, target;
    std::optional<double> af, ap, avg;
  };
  std::vector<Row> rows;
  int status = exit_ok;
  for (double v : values) {
    ExperimentConfig cv = config_from_json(apply_sweep_value(base, param, v));
    cv.output_dir = config.output_dir / "sweep" / ("value_" + fmt(v));
    const MatrixOutcome o = run_matrix(cv);
    if (o.exit_code() != exit_ok) status = exit_partial_failure;
    for (const auto& cell : group_cells(o.runs)) {
      const auto agg = cell_aggregate(cell);
      auto mean = [&](const char* k) -> std::optional<double> {
        if (!agg || !agg->metrics.at(k)) return std::nullopt;
        return agg->metrics.at(k)->mean;
      };
      rows.push_back({v, cell.front()->method, cell.front()->target, mean("AF"), mean("AP"), mean("AvgPerf")});
    }
  }
  std::map<std::pair<std::string, std::string>, double> min_ap;
  for (const auto& r : rows) {
    if (!r.ap) continue;
    const auto key = std::make_pair(r.method, r.target);
    auto it = min_ap.find(key);
    if (it == min_ap.end()) min_ap[key] = *r.ap;
    else it->second = std::min(it->second, *r.ap);
  }
  std::ostringstream csv;
  csv << "param,value,method,target,AF,AP,AP_normalized,AvgPerf\n";
  const double s = config.report_scale;
  for (const auto& r : rows) {
    const auto it = min_ap.find({r.method, r.target});
    std::optional<double> norm;
    if (r.ap && it != min_ap.end() && it->second > 0.0) norm = *r.ap / it->second;
    csv << param << ',' << fmt(r.value) << ',' << r.method << ',' << r.target << ',' << fmt(r.af, s) << ','
        << fmt(r.ap, s) << ',' << fmt(norm) << ',' << fmt(r.avg, s) << '\n';
  }
  write_text(config.output_dir / "sweep.csv", csv.str());
  return status;
}

ReportSummary emit_report(const fs::path& results) {
  ReportSummary summary;
  std::vector<RunRecord> runs;
  double scale = 1e3;
  const fs::path manifest = results / "runs.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    const json j = json::parse(in);
    scale = j.value("report_scale", scale);
    for (const auto& r : j.at("runs")) {
      RunRecord rec{r.at("method").get<std::string>(), r.at("target").get<std::string>(), r.at("seed").get<std::uint64_t>(),
                    r.at("status").get<std::string>() == "ok", r.at("error").get<std::string>(),
                    fs::path(r.at("dir").get<std::string>()), {}};
      if (rec.ok) {
        const fs::path mpath = results / rec.dir / "metrics.json";
        std::ifstream mi(mpath);
        if (mi) {
          rec.metrics = metrics_from(json::parse(mi));
        } else {
          rec.ok = false;
          rec.error = "missing " + mpath.string();
        }
      }
      runs.push_back(std::move(rec));
    }
  }
  summary.runs = runs.size();
  for (const auto& r : runs) summary.failed += r.ok ? 0 : 1;

  std::ostringstream agg_csv, text, heat, curves;
  agg_csv << "method,target,trials,AF_mean,AF_std,AP_mean,AP_std,AvgPerf_mean,AvgPerf_std,cpu_mean,cpu_std\n";
  heat << "method,target,seed,model_after_task,test_task,rmse\n";
  curves << "method,target,task,just_trained_mean,just_trained_std,final_mean,final_std\n";
  text << summary.runs << " runs (" << summary.runs - summary.failed << " ok, " << summary.failed << " failed)\n";

  if (!runs.empty()) {
    text << "AF, AP and AvgPerf are RMSE differences/means x" << fmt(scale) << "; CPU in seconds\n\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %-7s %6s  %-20s %-20s %-20s %-20s\n", "method", "target", "trials", "AF",
                  "AP", "AvgPerf", "CPU");
    text << line;
  }
  for (const auto& cell : group_cells(runs)) {
    const auto agg = cell_aggregate(cell);
    const std::string& method = cell.front()->method;
    const std::string& target = cell.front()->target;
    auto stat = [&](const char* k) -> std::optional<Stat> { return agg ? agg->metrics.at(k) : std::nullopt; };
    auto cols = [&](const char* k, double sc) {
      const auto s = stat(k);
      return s ? fmt(s->mean * sc) + "," + fmt(s->std * sc) : std::string("NA,NA");
    };
    std::size_t ok = 0;
    for (const auto* r : cell) ok += r->ok ? 1 : 0;
    agg_csv << method << ',' << target << ',' << ok << ',' << cols("AF", scale) << ',' << cols("AP", scale) << ','
            << cols("AvgPerf", scale) << ',' << cols("cpu_seconds", 1.0) << '\n';
    char line[512];
    std::snprintf(line, sizeof line, "%-8s %-7s %6zu  %-20s %-20s %-20s %-20s\n", method.c_str(), target.c_str(), ok,
                  pm(stat("AF"), scale).c_str(), pm(stat("AP"), scale).c_str(), pm(stat("AvgPerf"), scale).c_str(),
                  pm(stat("cpu_seconds"), 1.0).c_str());
    text << line;

    // Per-task curves over the seeds that finished.
    std::map<int, std::vector<double>> diag, last;
    for (const auto* r : cell) {
      if (!r->ok) continue;
      const auto rows = read_matrix(results / r->dir / "performance_matrix.csv");
      int n = 0;
      for (const auto& m : rows) n = std::max(n, m.i);
      for (const auto& m : rows) {
        heat << method << ',' << target << ',' << r->seed << ',' << m.i << ',' << m.j << ',' << fmt(m.v) << '\n';
        if (!m.v) continue;
        if (m.i == m.j) diag[m.j].push_back(*m.v);
        if (m.i == n) last[m.j].push_back(*m.v);
      }
    }
    for (const auto& [task, vals] : diag) {
      const Stat d = mean_and_std(vals);
      const auto f = last.count(task) ? std::optional<Stat>(mean_and_std(last[task])) : std::nullopt;
      curves << method << ',' << target << ',' << task << ',' << fmt(d.mean) << ',' << fmt(d.std) << ','
             << (f ? fmt(f->mean) + "," + fmt(f->std) : std::string("NA,NA")) << '\n';
    }
  }
  if (summary.failed > 0) {
    text << "\nfailed runs:\n";
    for (const auto& r : runs)
      if (!r.ok) text << "  " << r.method << " / " << r.target << " / seed " << r.seed << ": " << r.error << '\n';
  }

  write_text(results / "aggregate.csv", agg_csv.str());
  write_text(results / "summary.txt", text.str());
  write_text(results / "heatmap.csv", heat.str());
  write_text(results / "task_curves.csv", curves.str());
  return summary;
}

}  // namespace fedcl
