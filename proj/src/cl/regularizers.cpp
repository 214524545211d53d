#include "fedcl/cl/regularizers.hpp"

#include <algorithm>

#include "fedcl/errors.hpp"

namespace fedcl {

FisherInfo fisher_estimate(const LstmSpec& spec, const ParamVector& theta,
                           const WindowedDataset& data, std::size_t batch_size,
                           std::size_t max_batches, Exec exec) {
  if (data.empty()) throw ConfigError("fisher_estimate: empty dataset");
  if (batch_size == 0 || max_batches == 0) throw ConfigError("fisher_estimate: batch size and count must be positive");
  FisherInfo out{ParamVector(theta.layout_ptr()), theta};
  const std::size_t m = data.size();
  std::size_t used = 0;
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < m && used < max_batches; begin += batch_size, ++used) {
    rows.clear();
    for (std::size_t i = begin; i < std::min(m, begin + batch_size); ++i) rows.push_back(i);
    const GradResult g = loss_and_grad(spec, theta, data.x.gather_rows(rows), data.y.gather_rows(rows), {}, exec);
    for (std::size_t i = 0; i < g.grad.size(); ++i) out.importance[i] += g.grad[i] * g.grad[i];
  }
  out.importance *= 1.0 / static_cast<double>(used);
  return out;
}

FisherInfo oewc_update(const FisherInfo& old, const FisherInfo& fresh, double gamma,
                       const ParamVector& theta_after_task) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("O-EWC gamma must lie in [0, 1]");
  old.importance.require_same_layout(fresh.importance, "oewc_update");
  old.importance.require_same_layout(theta_after_task, "oewc_update anchor");
  FisherInfo out{old.importance, theta_after_task};
  for (std::size_t i = 0; i < out.importance.size(); ++i)
    out.importance[i] = gamma * old.importance[i] + (1.0 - gamma) * fresh.importance[i];
  return out;
}

SIAccumulator si_start(const ParamVector& theta, double xi) {
  if (!(xi > 0.0)) throw ConfigError("SI damping xi must be positive");
  ParamVector zero(theta.layout_ptr());
  return SIAccumulator{zero, zero, theta, theta, xi};
}

void si_begin_task(SIAccumulator& acc, const ParamVector& theta) {
  acc.w.require_same_layout(theta, "si_begin_task");
  acc.w.fill(0.0);
  acc.task_start = theta;
  acc.prev_step = theta;
}

void si_step(SIAccumulator& acc, const ParamVector& grad, const ParamVector& before,
             const ParamVector& after) {
  acc.w.require_same_layout(grad, "si_step gradient");
  before.require_same_layout(after, "si_step");
  for (std::size_t i = 0; i < acc.w.size(); ++i) acc.w[i] += (after[i] - before[i]) * -grad[i];
  acc.prev_step = after;
}

void si_consolidate(SIAccumulator& acc, const ParamVector& theta_end) {
  acc.w.require_same_layout(theta_end, "si_consolidate");
  for (std::size_t i = 0; i < acc.w.size(); ++i) {
    const double delta = theta_end[i] - acc.task_start[i];
    acc.omega[i] += std::max(acc.w[i], 0.0) / (delta * delta + acc.xi);
  }
  acc.w.fill(0.0);
  acc.task_start = theta_end;
  acc.prev_step = theta_end;
}

QuadraticPenalty ewc_term(const FisherInfo& fisher, double weight) {
  return QuadraticPenalty{weight, std::cref(fisher.importance), std::cref(fisher.anchor)};
}

QuadraticPenalty si_term(const SIAccumulator& acc, double weight) {
  return QuadraticPenalty{weight, std::cref(acc.omega), std::cref(acc.task_start)};
}

DistillationPenalty kd_term(const ParamVector& teacher, double weight) {
  return DistillationPenalty{weight, std::cref(teacher)};
}

double kd_value(const Tensor& student_pred, const Tensor& teacher_pred) {
  return mse_loss(student_pred, teacher_pred);
}

}  // namespace fedcl
