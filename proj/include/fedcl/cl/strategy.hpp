#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fedcl/cl/regularizers.hpp"
#include "fedcl/cl/replay.hpp"

namespace fedcl {

enum class Method { static_model, naive, replay, lwf, ewc, oewc, si };

/// Accepts the canonical names (Static, Naive, Replay, LwF, EWC, OEWC, SI),
/// case-insensitively, plus the aliases KD, O-EWC and Online-EWC.
Method parse_method(std::string_view name);
std::string method_name(Method m);
const std::vector<Method>& all_methods();

struct MethodParams {
  Method method = Method::naive;
  /// Strength of the method's extra loss term (replay, KD, EWC, O-EWC or SI).
  double weight = 0.0;
  /// Fraction of each finished task's train windows kept for replay. 0 keeps none.
  double replay_ratio = 0.0;
  double gamma = 0.9;
  double xi = 1e-3;
  std::size_t fisher_batches = 32;
  /// Multiplies the estimated Fisher before it enters the penalty.
  double fisher_scale = 1.0;

  void validate() const;
};

/// Everything one client remembers between tasks for its continual-learning method.
/// Task 0 is the base task; regularizers only start acting from task 1.
class ClState {
 public:
  ClState(const LstmSpec& spec, MethodParams params);

  const MethodParams& params() const noexcept { return params_; }
  Method method() const noexcept { return params_.method; }
  int current_task() const noexcept { return task_; }

  /// Whether any training happens during `task` (Static freezes after the base).
  bool trains(int task) const noexcept;

  void before_task(int task, const ParamVector& global);
  /// Extra loss terms for one local step. Replay draws its batch from `replay_rng`.
  /// The result references this state and is valid until the next hook call.
  std::vector<PenaltyTerm> loss_terms(std::size_t batch_rows, std::mt19937_64& replay_rng) const;
  void after_step(const ParamVector& grad, const ParamVector& before, const ParamVector& after);
  /// `theta_end` is the model the task finished with; `train` the client's train split.
  void after_task(int task, const ParamVector& theta_end, const WindowedDataset& train,
                  std::size_t batch_size, std::uint64_t seed, Exec exec = Exec::parallel);

  const ReplayBuffer& buffer() const noexcept { return buffer_; }
  const std::optional<ParamVector>& teacher() const noexcept { return teacher_; }
  const std::optional<FisherInfo>& fisher() const noexcept { return fisher_; }
  const std::optional<SIAccumulator>& si() const noexcept { return si_; }
  std::size_t fisher_estimates() const noexcept { return fisher_estimates_; }

  nlohmann::json snapshot() const;
  static ClState restore(const LstmSpec& spec, const nlohmann::json& snap);

 private:
  FisherInfo estimate(const ParamVector& theta, const WindowedDataset& train, std::size_t batch_size,
                      Exec exec);

  LstmSpec spec_;
  MethodParams params_;
  int task_ = -1;
  ReplayBuffer buffer_;
  std::optional<ParamVector> teacher_;
  std::optional<FisherInfo> fisher_;
  std::optional<SIAccumulator> si_;
  bool si_consolidated_ = false;
  std::size_t fisher_estimates_ = 0;
};

}  // namespace fedcl
