#include "fedcl/core/loss.hpp"

#include <cmath>
#include <string>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) throw ShapeError(std::string(what) + ": shape mismatch");
}

void check_penalty_layout(const ParamVector& theta, const PenaltyTerm& term) {
  std::visit(overloaded{
                 [&](const QuadraticPenalty& q) {
                   theta.require_same_layout(q.importance.get(), "quadratic penalty importance");
                   theta.require_same_layout(q.anchor.get(), "quadratic penalty anchor");
                 },
                 [&](const DistillationPenalty& d) {
                   theta.require_same_layout(d.teacher.get(), "distillation teacher");
                 },
                 [&](const ReplayPenalty&) {},
             },
             term);
}

// d/dpred of weight * mse(pred, ref), added into dpred.
void add_mse_pred_grad(const Tensor& pred, const Tensor& ref, double weight, Tensor& dpred) {
  const double scale = weight * 2.0 / static_cast<double>(pred.dim(0));
  auto p = pred.data();
  auto r = ref.data();
  auto g = dpred.data();
  for (std::size_t i = 0; i < p.size(); ++i) g[i] += scale * (p[i] - r[i]);
}

}  // namespace

double mse_loss(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse_loss");
  if (pred.rank() != 2) throw ShapeError("mse_loss expects [B, p] tensors");
  const std::size_t rows = pred.dim(0);
  if (rows == 0) return 0.0;
  double sum = 0.0;
  auto p = pred.data();
  auto t = target.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = p[i] - t[i];
    sum += e * e;
  }
  return sum / static_cast<double>(rows);
}

double quadratic_penalty_value(const ParamVector& theta, const QuadraticPenalty& term) {
  const auto th = theta.values();
  const auto imp = term.importance.get().values();
  const auto anc = term.anchor.get().values();
  double sum = 0.0;
  for (std::size_t i = 0; i < th.size(); ++i) {
    const double diff = th[i] - anc[i];
    sum += imp[i] * diff * diff;
  }
  return term.weight * sum;
}

void add_quadratic_penalty_grad(const ParamVector& theta, const QuadraticPenalty& term,
                                ParamVector& grad) {
  const auto th = theta.values();
  const auto imp = term.importance.get().values();
  const auto anc = term.anchor.get().values();
  auto g = grad.values();
  const double two_w = 2.0 * term.weight;
  for (std::size_t i = 0; i < th.size(); ++i) g[i] += two_w * imp[i] * (th[i] - anc[i]);
}

GradResult loss_and_grad(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
                         const Tensor& batch_y, std::span<const PenaltyTerm> terms, Exec exec) {
  for (const auto& term : terms) check_penalty_layout(theta, term);

  GradResult result{0.0, ParamVector(theta.layout_ptr())};
  LstmTape tape(spec, theta, batch_x, exec);
  const Tensor& pred = tape.predictions();
  require_same_shape(pred, batch_y, "loss_and_grad target");

  Tensor dpred(pred.shape());
  if (pred.dim(0) > 0) {
    result.loss = mse_loss(pred, batch_y);
    add_mse_pred_grad(pred, batch_y, 1.0, dpred);
  }

  for (const auto& term : terms) {
    if (const auto* kd = std::get_if<DistillationPenalty>(&term)) {
      if (pred.dim(0) == 0) continue;
      const Tensor teacher_pred = lstm_forward(spec, kd->teacher.get(), batch_x, exec);
      result.loss += kd->weight * mse_loss(pred, teacher_pred);
      add_mse_pred_grad(pred, teacher_pred, kd->weight, dpred);
    }
  }
  if (pred.dim(0) > 0) tape.accumulate_gradient(dpred, result.grad);

  for (const auto& term : terms) {
    if (const auto* rp = std::get_if<ReplayPenalty>(&term)) {
      if (rp->x.empty() || rp->x.dim(0) == 0) continue;
      LstmTape replay_tape(spec, theta, rp->x, exec);
      const Tensor& rpred = replay_tape.predictions();
      require_same_shape(rpred, rp->y, "replay target");
      result.loss += rp->weight * mse_loss(rpred, rp->y);
      Tensor rgrad(rpred.shape());
      add_mse_pred_grad(rpred, rp->y, rp->weight, rgrad);
      replay_tape.accumulate_gradient(rgrad, result.grad);
    } else if (const auto* q = std::get_if<QuadraticPenalty>(&term)) {
      result.loss += quadratic_penalty_value(theta, *q);
      add_quadratic_penalty_grad(theta, *q, result.grad);
    }
  }

  if (!std::isfinite(result.loss)) throw NonFiniteError("loss is not finite");
  if (!result.grad.all_finite()) throw NonFiniteError("gradient has non-finite entries");
  return result;
}

double total_loss(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
                  const Tensor& batch_y, std::span<const PenaltyTerm> terms) {
  for (const auto& term : terms) check_penalty_layout(theta, term);
  const Tensor pred = lstm_forward(spec, theta, batch_x, Exec::serial);
  double loss = mse_loss(pred, batch_y);
  for (const auto& term : terms) {
    std::visit(overloaded{
                   [&](const QuadraticPenalty& q) { loss += quadratic_penalty_value(theta, q); },
                   [&](const DistillationPenalty& d) {
                     const Tensor tp = lstm_forward(spec, d.teacher.get(), batch_x, Exec::serial);
                     loss += d.weight * mse_loss(pred, tp);
                   },
                   [&](const ReplayPenalty& r) {
                     if (r.x.empty() || r.x.dim(0) == 0) return;
                     const Tensor rp = lstm_forward(spec, theta, r.x, Exec::serial);
                     loss += r.weight * mse_loss(rp, r.y);
                   },
               },
               term);
  }
  return loss;
}

ParamVector finite_diff_grad(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
                             const Tensor& batch_y, std::span<const PenaltyTerm> terms, double eps) {
  if (!(eps > 0.0)) throw ConfigError("finite-difference step must be positive");
  ParamVector grad(theta.layout_ptr());
  ParamVector probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = total_loss(spec, probe, batch_x, batch_y, terms);
    probe[i] = orig - eps;
    const double down = total_loss(spec, probe, batch_x, batch_y, terms);
    probe[i] = orig;
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

}  // namespace fedcl
