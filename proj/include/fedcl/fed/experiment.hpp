#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"

#include "fedcl/cl/strategy.hpp"
#include "fedcl/core/optimizer.hpp"
#include "fedcl/eval/metrics.hpp"
#include "fedcl/fed/fedavg.hpp"
#include "fedcl/fed/provider.hpp"

namespace fedcl {

struct FedConfig {
  LstmSpec model;
  OptimizerConfig optimizer;
  std::size_t batch_size = 64;
  std::size_t local_epochs = 1;
  std::size_t base_rounds = 500;
  std::size_t task_rounds = 30;
  MethodParams method;
  /// Also fill P entries for tasks the model has not been trained on yet.
  bool evaluate_upper = true;
  Exec exec = Exec::parallel;

  void validate() const;
};

struct ClientState {
  int id = 0;
  ClState cl;
};

std::vector<ClientState> make_clients(const FedConfig& config, std::size_t count);

struct LocalResult {
  ParamVector theta;
  std::size_t samples = 0;      // n_k: train windows of the current task
  std::size_t samples_seen = 0; // over all local epochs
  std::size_t steps = 0;
  double mean_loss = 0.0;       // mean total loss over the steps
};

struct RoundContext {
  std::uint64_t seed = 0;
  int task = 0;
  std::size_t round = 0;
};

/// Starts from `global`, makes `local_epochs` shuffled passes over `train` in
/// mini-batches with the method's loss terms and step hooks. An empty split
/// returns `global` with zero samples. Non-finite values raise DivergenceError.
LocalResult local_train(const FedConfig& config, ClientState& client, const ParamVector& global,
                        const WindowedDataset& train, const RoundContext& ctx);

struct ClientRound {
  int client = 0;
  std::size_t samples = 0;
  double loss = 0.0;
};

struct RoundReport {
  int task = 0;
  std::size_t round = 0;
  std::vector<ClientRound> clients;
  /// sum_k (n_k / n) loss_k over clients that trained.
  double weighted_loss = 0.0;
  double wall_seconds = 0.0;
  double cpu_seconds = 0.0;
  std::uint64_t fingerprint = 0;  // of the aggregated parameters
};

nlohmann::json round_json(const RoundReport& r);

using RoundCallback = std::function<void(const RoundReport&)>;

/// One task: before-task hooks, `rounds` synchronous FedAvg rounds (none when the
/// method no longer trains), then after-task hooks on the resulting global model.
std::vector<RoundReport> run_phase(const FedConfig& config, const DatasetProvider& data,
                                   std::vector<ClientState>& clients, ParamVector& global, int task,
                                   std::size_t rounds, std::uint64_t seed, const RoundCallback& on_round = {});

struct ExperimentResult {
  PerformanceMatrix p;
  std::vector<RoundReport> rounds;
  double cpu_seconds = 0.0;
  ParamVector base_model;
  /// Global model after each continual task.
  std::vector<ParamVector> task_models;
  /// Parameter fingerprint after every round, in order.
  std::vector<std::uint64_t> trajectory;
};

/// Base phase, then tasks 1..N, filling row i of P after task i from the pooled
/// test windows of every client.
ExperimentResult run_experiment(const FedConfig& config, const DatasetProvider& data, std::uint64_t seed,
                                const RoundCallback& on_round = {});

/// Checks that every split matches the model's window shape; throws ShapeError.
void check_provider(const FedConfig& config, const DatasetProvider& data);

}  // namespace fedcl
