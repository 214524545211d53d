#pragma once

#include <functional>
#include <span>
#include <variant>

#include "fedcl/core/lstm.hpp"
#include "fedcl/core/param_vector.hpp"
#include "fedcl/core/tensor.hpp"

namespace fedcl {

/// Mean over rows of the squared L2 row distance: (1/B) * sum_b ||pred_b - target_b||^2.
double mse_loss(const Tensor& pred, const Tensor& target);

/// weight * sum_i importance_i * (theta_i - anchor_i)^2
struct QuadraticPenalty {
  double weight;
  std::reference_wrapper<const ParamVector> importance;
  std::reference_wrapper<const ParamVector> anchor;
};

/// weight * mse(f_theta(x), f_teacher(x)) on the current batch inputs.
struct DistillationPenalty {
  double weight;
  std::reference_wrapper<const ParamVector> teacher;
};

/// weight * mse(f_theta(x), y) on a separate (replayed) batch.
struct ReplayPenalty {
  double weight;
  Tensor x;
  Tensor y;
};

using PenaltyTerm = std::variant<QuadraticPenalty, DistillationPenalty, ReplayPenalty>;

struct GradResult {
  double loss = 0.0;
  ParamVector grad;
};

double quadratic_penalty_value(const ParamVector& theta, const QuadraticPenalty& term);
/// grad += 2 * weight * importance * (theta - anchor)
void add_quadratic_penalty_grad(const ParamVector& theta, const QuadraticPenalty& term,
                                ParamVector& grad);

/// Task MSE plus every penalty, with the exact gradient of the total.
/// Throws NonFiniteError when the loss or any gradient entry is not finite.
GradResult loss_and_grad(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
                         const Tensor& batch_y, std::span<const PenaltyTerm> terms,
                         Exec exec = Exec::parallel);

/// Forward-only evaluation of the same total loss.
double total_loss(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
                  const Tensor& batch_y, std::span<const PenaltyTerm> terms);

/// Central differences of total_loss, one coordinate at a time.
ParamVector finite_diff_grad(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
                             const Tensor& batch_y, std::span<const PenaltyTerm> terms, double eps);

}  // namespace fedcl
