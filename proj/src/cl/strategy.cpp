#include "fedcl/cl/strategy.hpp"

#include <algorithm>
#include <cctype>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

nlohmann::json vec_json(const ParamVector& v) {
  return nlohmann::json(std::vector<double>(v.values().begin(), v.values().end()));
}

ParamVector vec_from(const LayoutPtr& layout, const nlohmann::json& j) {
  return ParamVector(layout, j.get<std::vector<double>>());
}

nlohmann::json tensor_json(const Tensor& t) {
  return {{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor tensor_from(const nlohmann::json& j) {
  return Tensor(j.at("shape").get<std::vector<std::size_t>>(), j.at("data").get<std::vector<double>>());
}

}  // namespace

Method parse_method(std::string_view name) {
  const std::string n = lower(name);
  if (n == "static") return Method::static_model;
  if (n == "naive") return Method::naive;
  if (n == "replay") return Method::replay;
  if (n == "lwf" || n == "kd") return Method::lwf;
  if (n == "ewc") return Method::ewc;
  if (n == "oewc" || n == "o-ewc" || n == "online-ewc") return Method::oewc;
  if (n == "si") return Method::si;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::static_model: return "Static";
    case Method::naive: return "Naive";
    case Method::replay: return "Replay";
    case Method::lwf: return "LwF";
    case Method::ewc: return "EWC";
    case Method::oewc: return "OEWC";
    case Method::si: return "SI";
  }
  return "?";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> v{Method::static_model, Method::naive, Method::replay, Method::lwf,
                                     Method::ewc,          Method::oewc,  Method::si};
  return v;
}

void MethodParams::validate() const {
  if (!(weight >= 0.0)) throw ConfigError("method weight must be >= 0");
  if (!(replay_ratio >= 0.0 && replay_ratio <= 1.0)) throw ConfigError("replay ratio must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(xi > 0.0)) throw ConfigError("xi must be positive");
  if (fisher_batches == 0) throw ConfigError("fisher_batches must be positive");
  if (!(fisher_scale >= 0.0)) throw ConfigError("fisher_scale must be >= 0");
}

ClState::ClState(const LstmSpec& spec, MethodParams params) : spec_(spec), params_(params) {
  spec_.validate();
  params_.validate();
}

bool ClState::trains(int task) const noexcept {
  return params_.method != Method::static_model || task == 0;
}

void ClState::before_task(int task, const ParamVector& global) {
  require_layout(spec_, global);
  task_ = task;
  switch (params_.method) {
    case Method::lwf:
      if (task > 0) teacher_ = global;
      break;
    case Method::si:
      if (!si_) si_ = si_start(global, params_.xi);
      else si_begin_task(*si_, global);
      break;
    default:
      break;
  }
}

std::vector<PenaltyTerm> ClState::loss_terms(std::size_t batch_rows, std::mt19937_64& replay_rng) const {
  std::vector<PenaltyTerm> terms;
  if (task_ < 1) return terms;
  switch (params_.method) {
    case Method::replay:
      if (!buffer_.empty()) {
        auto [x, y] = buffer_.sample(batch_rows, replay_rng);
        terms.emplace_back(ReplayPenalty{params_.weight, std::move(x), std::move(y)});
      }
      break;
    case Method::lwf:
      if (teacher_) terms.emplace_back(kd_term(*teacher_, params_.weight));
      break;
    case Method::ewc:
    case Method::oewc:
      if (fisher_) terms.emplace_back(ewc_term(*fisher_, params_.weight));
      break;
    case Method::si:
      if (si_ && si_consolidated_) terms.emplace_back(si_term(*si_, params_.weight));
      break;
    default:
      break;
  }
  return terms;
}

void ClState::after_step(const ParamVector& grad, const ParamVector& before, const ParamVector& after) {
  if (params_.method == Method::si && si_) si_step(*si_, grad, before, after);
}

FisherInfo ClState::estimate(const ParamVector& theta, const WindowedDataset& train,
                             std::size_t batch_size, Exec exec) {
  FisherInfo f = fisher_estimate(spec_, theta, train, batch_size, params_.fisher_batches, exec);
  f.importance *= params_.fisher_scale;
  ++fisher_estimates_;
  return f;
}

void ClState::after_task(int task, const ParamVector& theta_end, const WindowedDataset& train,
                         std::size_t batch_size, std::uint64_t seed, Exec exec) {
  require_layout(spec_, theta_end);
  switch (params_.method) {
    case Method::replay:
      if (task > 0 && params_.replay_ratio > 0.0 && !train.empty())
        buffer_.add(task, train, replay_select(train, params_.replay_ratio, seed, exec));
      break;
    case Method::ewc:
      if (task == 0 && !train.empty()) fisher_ = estimate(theta_end, train, batch_size, exec);
      break;
    case Method::oewc:
      if (train.empty()) {
        if (fisher_) fisher_->anchor = theta_end;
      } else if (!fisher_) {
        fisher_ = estimate(theta_end, train, batch_size, exec);
      } else {
        fisher_ = oewc_update(*fisher_, estimate(theta_end, train, batch_size, exec), params_.gamma, theta_end);
      }
      break;
    case Method::si:
      if (si_) {
        si_consolidate(*si_, theta_end);
        si_consolidated_ = true;
      }
      break;
    default:
      break;
  }
}

nlohmann::json ClState::snapshot() const {
  nlohmann::json j;
  j["layout"] = make_layout(spec_)->name();
  j["method"] = method_name(params_.method);
  j["params"] = {{"weight", params_.weight},
                 {"replay_ratio", params_.replay_ratio},
                 {"gamma", params_.gamma},
                 {"xi", params_.xi},
                 {"fisher_batches", params_.fisher_batches},
                 {"fisher_scale", params_.fisher_scale}};
  j["task"] = task_;
  j["fisher_estimates"] = fisher_estimates_;
  nlohmann::json buf = nlohmann::json::array();
  for (const auto& t : buffer_.tasks()) buf.push_back({{"task", t.task}, {"x", tensor_json(t.x)}, {"y", tensor_json(t.y)}});
  j["buffer"] = buf;
  if (teacher_) j["teacher"] = vec_json(*teacher_);
  if (fisher_) j["fisher"] = {{"importance", vec_json(fisher_->importance)}, {"anchor", vec_json(fisher_->anchor)}};
  if (si_) {
    j["si"] = {{"w", vec_json(si_->w)},
               {"omega", vec_json(si_->omega)},
               {"task_start", vec_json(si_->task_start)},
               {"prev_step", vec_json(si_->prev_step)},
               {"xi", si_->xi},
               {"consolidated", si_consolidated_}};
  }
  return j;
}

ClState ClState::restore(const LstmSpec& spec, const nlohmann::json& snap) {
  try {
    const LayoutPtr layout = make_layout(spec);
    if (snap.at("layout").get<std::string>() != layout->name())
      throw LayoutError("snapshot layout " + snap.at("layout").get<std::string>() + " does not match " + layout->name());
    const auto& p = snap.at("params");
    MethodParams params;
    params.method = parse_method(snap.at("method").get<std::string>());
    params.weight = p.at("weight").get<double>();
    params.replay_ratio = p.at("replay_ratio").get<double>();
    params.gamma = p.at("gamma").get<double>();
    params.xi = p.at("xi").get<double>();
    params.fisher_batches = p.at("fisher_batches").get<std::size_t>();
    params.fisher_scale = p.at("fisher_scale").get<double>();

    ClState s(spec, params);
    s.task_ = snap.at("task").get<int>();
    s.fisher_estimates_ = snap.at("fisher_estimates").get<std::size_t>();
    for (const auto& t : snap.at("buffer"))
      s.buffer_.add(ReplayTask{t.at("task").get<int>(), tensor_from(t.at("x")), tensor_from(t.at("y"))});
    if (snap.contains("teacher")) s.teacher_ = vec_from(layout, snap["teacher"]);
    if (snap.contains("fisher"))
      s.fisher_ = FisherInfo{vec_from(layout, snap["fisher"].at("importance")), vec_from(layout, snap["fisher"].at("anchor"))};
    if (snap.contains("si")) {
      const auto& si = snap["si"];
      s.si_ = SIAccumulator{vec_from(layout, si.at("w")), vec_from(layout, si.at("omega")),
                            vec_from(layout, si.at("task_start")), vec_from(layout, si.at("prev_step")),
                            si.at("xi").get<double>()};
      s.si_consolidated_ = si.at("consolidated").get<bool>();
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed CL snapshot: ") + e.what());
  }
}

}  // namespace fedcl
