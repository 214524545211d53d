#include "fedcl/core/optimizer.hpp"

#include <cmath>

#include "fedcl/errors.hpp"

namespace fedcl {

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(config_.lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (config_.kind == OptimizerConfig::Kind::adam) {
    if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0 && config_.beta2 >= 0.0 &&
          config_.beta2 < 1.0)) {
      throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(config_.eps > 0.0)) throw ConfigError("Adam eps must be positive");
  }
}

void Optimizer::step(ParamVector& theta, const ParamVector& grad) {
  theta.require_same_layout(grad, "optimizer step");
  ++steps_;
  auto th = theta.values();
  const auto g = grad.values();
  if (config_.kind == OptimizerConfig::Kind::sgd) {
    for (std::size_t i = 0; i < th.size(); ++i) th[i] -= config_.lr * g[i];
    return;
  }
  if (m_.size() == 0) {
    m_ = ParamVector(theta.layout_ptr());
    v_ = ParamVector(theta.layout_ptr());
  } else {
    theta.require_same_layout(m_, "optimizer state");
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  auto m = m_.values();
  auto v = v_.values();
  for (std::size_t i = 0; i < th.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    th[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
  }
}

}  // namespace fedcl
