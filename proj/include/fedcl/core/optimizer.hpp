#pragma once

#include <cstdint>

#include "fedcl/core/param_vector.hpp"

namespace fedcl {

struct OptimizerConfig {
  enum class Kind { adam, sgd };
  Kind kind = Kind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Moment estimates and step counter for one training loop.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  /// Updates theta in place. Moments are allocated on first use and bound to
  /// theta's layout from then on.
  void step(ParamVector& theta, const ParamVector& grad);

  const OptimizerConfig& config() const noexcept { return config_; }
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  ParamVector m_;
  ParamVector v_;
};

}  // namespace fedcl
