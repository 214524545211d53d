#include "fedcl/fed/experiment.hpp"

#include <chrono>
#include <exception>
#include <numeric>
#include <random>
#include <string>

#include "fedcl/core/seed.hpp"
#include "fedcl/errors.hpp"
#include "fedcl/eval/cpu_timer.hpp"
#include "fedcl/eval/evaluate.hpp"
#include "fedcl/log.hpp"

namespace fedcl {

namespace {

enum Stream : std::uint64_t { init_stream = 1, shuffle_stream, replay_stream, select_stream };

// Runs fn(k) for every client, concurrently when allowed, then rethrows the
// failure of the lowest client index.
template <class Fn>
void for_each_client(std::size_t count, Exec exec, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) if (exec == Exec::parallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void FedConfig::validate() const {
  model.validate();
  method.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (local_epochs == 0) throw ConfigError("local_epochs must be positive");
  Optimizer probe(optimizer);
}

std::vector<ClientState> make_clients(const FedConfig& config, std::size_t count) {
  std::vector<ClientState> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(ClientState{static_cast<int>(k), ClState(config.model, config.method)});
  return out;
}

LocalResult local_train(const FedConfig& config, ClientState& client, const ParamVector& global,
                        const WindowedDataset& train, const RoundContext& ctx) {
  LocalResult out{global, train.size(), 0, 0, 0.0};
  if (train.empty()) return out;

  const auto k = static_cast<std::uint64_t>(client.id);
  const auto task = static_cast<std::uint64_t>(ctx.task);
  std::mt19937_64 shuffle_rng(derive_seed(ctx.seed, {shuffle_stream, task, ctx.round, k}));
  std::mt19937_64 replay_rng(derive_seed(ctx.seed, {replay_stream, task, ctx.round, k}));
  Optimizer opt(config.optimizer);
  const std::size_t m = train.size();
  std::vector<std::size_t> order(m), rows;
  std::iota(order.begin(), order.end(), std::size_t{0});

  try {
    for (std::size_t epoch = 0; epoch < config.local_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (std::size_t begin = 0; begin < m; begin += config.batch_size) {
        const std::size_t end = std::min(m, begin + config.batch_size);
        rows.assign(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
        const Tensor bx = train.x.gather_rows(rows), by = train.y.gather_rows(rows);
        const std::vector<PenaltyTerm> terms = client.cl.loss_terms(rows.size(), replay_rng);
        const GradResult g = loss_and_grad(config.model, out.theta, bx, by, terms, config.exec);
        const ParamVector before = out.theta;
        opt.step(out.theta, g.grad);
        if (!out.theta.all_finite()) throw NonFiniteError("parameters became non-finite");
        client.cl.after_step(g.grad, before, out.theta);
        out.mean_loss += g.loss;
        out.samples_seen += rows.size();
        ++out.steps;
      }
    }
  } catch (const NonFiniteError& e) {
    throw DivergenceError(e.what(), ctx.task, static_cast<int>(ctx.round), client.id);
  }
  out.mean_loss /= static_cast<double>(out.steps);
  return out;
}

nlohmann::json round_json(const RoundReport& r) {
  nlohmann::json clients = nlohmann::json::array();
  for (const auto& c : r.clients) clients.push_back({{"client", c.client}, {"samples", c.samples}, {"loss", c.loss}});
  return {{"phase", r.task == 0 ? "base" : "task"},
          {"task", r.task},
          {"round", r.round},
          {"weighted_loss", r.weighted_loss},
          {"clients", clients},
          {"wall_seconds", r.wall_seconds},
          {"cpu_seconds", r.cpu_seconds}};
}

std::vector<RoundReport> run_phase(const FedConfig& config, const DatasetProvider& data,
                                   std::vector<ClientState>& clients, ParamVector& global, int task,
                                   std::size_t rounds, std::uint64_t seed, const RoundCallback& on_round) {
  require_layout(config.model, global);
  const std::size_t count = clients.size();
  for_each_client(count, config.exec, [&](std::size_t k) {
    ActingClient acting(clients[k].id);
    clients[k].cl.before_task(task, global);
  });

  std::vector<RoundReport> reports;
  const bool trains = count > 0 && clients.front().cl.trains(task);
  for (std::size_t r = 0; trains && r < rounds; ++r) {
    const auto wall0 = std::chrono::steady_clock::now();
    CpuTimer cpu;
    std::vector<ClientUpdate> updates(count);
    std::vector<LocalResult> results(count);
    for_each_client(count, config.exec, [&](std::size_t k) {
      ActingClient acting(clients[k].id);
      const WindowedDataset& train = data.train(clients[k].id, task);
      results[k] = local_train(config, clients[k], global, train, RoundContext{seed, task, r});
      updates[k] = ClientUpdate{clients[k].id, results[k].theta, results[k].samples};
    });
    global = fedavg_aggregate(updates);

    RoundReport rep;
    rep.task = task;
    rep.round = r;
    std::vector<std::size_t> counts;
    for (std::size_t k = 0; k < count; ++k) {
      rep.clients.push_back(ClientRound{clients[k].id, results[k].samples, results[k].mean_loss});
      counts.push_back(results[k].samples);
    }
    const std::vector<double> w = fedavg_weights(counts);
    for (std::size_t k = 0; k < count; ++k) rep.weighted_loss += w[k] * results[k].mean_loss;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    rep.cpu_seconds = cpu.elapsed();
    rep.fingerprint = fingerprint(global);
    if (on_round) on_round(rep);
    reports.push_back(std::move(rep));
  }

  for_each_client(count, config.exec, [&](std::size_t k) {
    ActingClient acting(clients[k].id);
    const WindowedDataset& train = data.train(clients[k].id, task);
    const std::uint64_t s = derive_seed(seed, {select_stream, static_cast<std::uint64_t>(task),
                                               static_cast<std::uint64_t>(clients[k].id)});
    clients[k].cl.after_task(task, global, train, config.batch_size, s, config.exec);
  });
  return reports;
}

void check_provider(const FedConfig& config, const DatasetProvider& data) {
  const LstmSpec& s = config.model;
  if (data.num_clients() == 0) throw ConfigError("no clients");
  if (data.num_tasks() == 0) throw ScheduleError("no continual tasks");
  for (std::size_t k = 0; k < data.num_clients(); ++k) {
    ActingClient acting(static_cast<int>(k));
    for (std::size_t t = 0; t <= data.num_tasks(); ++t) {
      for (const WindowedDataset* d : {&data.train(static_cast<int>(k), static_cast<int>(t)),
                                       &data.test(static_cast<int>(k), static_cast<int>(t))}) {
        if (d->x.rank() != 3 || d->y.rank() != 2 || d->x.dim(1) != s.lag || d->x.dim(2) != s.input_dim ||
            d->y.dim(1) != s.horizon || d->y.dim(0) != d->x.dim(0))
          throw ShapeError("client " + std::to_string(k) + " task " + std::to_string(t) +
                           " windows do not match the model shape");
      }
    }
  }
}

ExperimentResult run_experiment(const FedConfig& config, const DatasetProvider& data, std::uint64_t seed,
                                 const RoundCallback& on_round) {
  config.validate();
  check_provider(config, data);
  const std::size_t n_tasks = data.num_tasks();
  const std::size_t n_clients = data.num_clients();

  CpuTimer timer;
  ExperimentResult res{PerformanceMatrix(n_tasks), {}, 0.0, {}, {}, {}};
  std::vector<ClientState> clients = make_clients(config, n_clients);
  ParamVector global = init_params(config.model, derive_seed(seed, {init_stream}));

  auto run = [&](int task, std::size_t rounds) {
    auto reps = run_phase(config, data, clients, global, task, rounds, seed, on_round);
    for (auto& r : reps) {
      res.trajectory.push_back(r.fingerprint);
      res.rounds.push_back(std::move(r));
    }
  };

  run(0, config.base_rounds);
  res.base_model = global;
  log::info("base model trained (" + std::to_string(config.base_rounds) + " rounds)");

  std::vector<const WindowedDataset*> parts(n_clients);
  for (std::size_t i = 1; i <= n_tasks; ++i) {
    run(static_cast<int>(i), config.task_rounds);
    res.task_models.push_back(global);
    for (std::size_t j = 1; j <= n_tasks; ++j) {
      if (j > i && !config.evaluate_upper) continue;
      for (std::size_t k = 0; k < n_clients; ++k) parts[k] = &data.test(static_cast<int>(k), static_cast<int>(j));
      const auto e = pooled_rmse(config.model, global, parts, config.exec);
      if (!e) log::warn("task " + std::to_string(j) + " has no test windows; entry left missing");
      res.p.set(i - 1, j - 1, e);
    }
  }
  res.cpu_seconds = timer.elapsed();
  return res;
}

}  // namespace fedcl
