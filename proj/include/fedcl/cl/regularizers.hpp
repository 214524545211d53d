#pragma once

#include <cstddef>

#include "fedcl/core/loss.hpp"
#include "fedcl/data/windowing.hpp"

namespace fedcl {

/// Diagonal importance with the parameters it anchors to. importance >= 0.
struct FisherInfo {
  ParamVector importance;
  ParamVector anchor;
};

/// Empirical diagonal Fisher: mean over up to `max_batches` consecutive batches of the
/// squared task-MSE gradient at theta. The anchor is theta.
FisherInfo fisher_estimate(const LstmSpec& spec, const ParamVector& theta,
                           const WindowedDataset& data, std::size_t batch_size,
                           std::size_t max_batches = 32, Exec exec = Exec::parallel);

/// importance = gamma * old + (1 - gamma) * fresh; anchor = theta_after_task.
FisherInfo oewc_update(const FisherInfo& old, const FisherInfo& fresh, double gamma,
                       const ParamVector& theta_after_task);

struct SIAccumulator {
  ParamVector w;           // running path integral for the current task
  ParamVector omega;       // consolidated importance, summed over tasks
  ParamVector task_start;  // anchor: parameters when the task began
  ParamVector prev_step;   // parameters after the last recorded step
  double xi = 1e-3;
};

SIAccumulator si_start(const ParamVector& theta, double xi);
/// Begin a new task at theta; keeps omega.
void si_begin_task(SIAccumulator& acc, const ParamVector& theta);
/// w += (after - before) * (-grad)
void si_step(SIAccumulator& acc, const ParamVector& grad, const ParamVector& before,
             const ParamVector& after);
/// omega += max(w, 0) / ((theta_end - task_start)^2 + xi); w = 0; anchor = theta_end.
void si_consolidate(SIAccumulator& acc, const ParamVector& theta_end);

QuadraticPenalty ewc_term(const FisherInfo& fisher, double weight);
QuadraticPenalty si_term(const SIAccumulator& acc, double weight);
DistillationPenalty kd_term(const ParamVector& teacher, double weight);

/// Distillation value on given predictions: mse(student, teacher).
double kd_value(const Tensor& student_pred, const Tensor& teacher_pred);

}  // namespace fedcl
