#pragma once

// Shared test helpers: random fixtures and an independent LSTM forward pass.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fedcl/core/lstm.hpp"
#include "fedcl/core/param_vector.hpp"
#include "fedcl/core/tensor.hpp"
#include "fedcl/fed/provider.hpp"

namespace testsupport {

inline fedcl::Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed,
                                   double lo = -1.0, double hi = 1.0) {
  fedcl::Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.data()) v = u(rng);
  return t;
}

inline fedcl::ParamVector random_params(const fedcl::LstmSpec& spec, std::uint64_t seed,
                                        double scale = 0.5) {
  fedcl::ParamVector p(fedcl::make_layout(spec));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : p.values()) v = u(rng);
  return p;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Worst-case |analytic - numeric| / (|analytic| + 1e-8).
inline double max_rel_error(std::span<const double> analytic, std::span<const double> numeric) {
  double m = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    m = std::max(m, std::abs(analytic[i] - numeric[i]) / (std::abs(analytic[i]) + 1e-8));
  }
  return m;
}

/// Straight-line LSTM forward for one sample, written gate by gate against the
/// named segments. Shares nothing with the library kernels besides the layout
/// naming contract.
inline std::vector<double> reference_forward(const fedcl::LstmSpec& spec,
                                             const fedcl::ParamVector& theta,
                                             std::span<const double> window) {
  const std::size_t h = spec.hidden_dim;
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  std::vector<std::vector<double>> layer_input(spec.lag);
  for (std::size_t t = 0; t < spec.lag; ++t) {
    layer_input[t].assign(window.begin() + t * spec.input_dim,
                          window.begin() + (t + 1) * spec.input_dim);
  }
  for (std::size_t l = 0; l < spec.num_layers; ++l) {
    const std::string p = "lstm" + std::to_string(l) + ".";
    auto wx = theta.segment(p + "w_x");
    auto wh = theta.segment(p + "w_h");
    auto b = theta.segment(p + "b");
    const std::size_t in = layer_input[0].size();
    std::vector<double> hs(h, 0.0), cs(h, 0.0);
    std::vector<std::vector<double>> outputs;
    for (std::size_t t = 0; t < spec.lag; ++t) {
      auto pre = [&](std::size_t gate, std::size_t j) {
        const std::size_t r = gate * h + j;
        double z = b[r];
        for (std::size_t c = 0; c < in; ++c) z += wx[r * in + c] * layer_input[t][c];
        for (std::size_t c = 0; c < h; ++c) z += wh[r * h + c] * hs[c];
        return z;
      };
      std::vector<double> i_g(h), f_g(h), g_g(h), o_g(h);
      for (std::size_t j = 0; j < h; ++j) {
        i_g[j] = sig(pre(0, j));
        f_g[j] = sig(pre(1, j));
        g_g[j] = std::tanh(pre(2, j));
        o_g[j] = sig(pre(3, j));
      }
      for (std::size_t j = 0; j < h; ++j) {
        cs[j] = f_g[j] * cs[j] + i_g[j] * g_g[j];
        hs[j] = o_g[j] * std::tanh(cs[j]);
      }
      outputs.push_back(hs);
    }
    layer_input = outputs;
  }
  auto hw = theta.segment("head.w");
  auto hb = theta.segment("head.b");
  const auto& last = layer_input.back();
  std::vector<double> out(spec.horizon);
  for (std::size_t k = 0; k < spec.horizon; ++k) {
    out[k] = hb[k];
    for (std::size_t j = 0; j < h; ++j) out[k] += hw[k * h + j] * last[j];
  }
  return out;
}

// Random windows for `clients` x (tasks + 1) splits; task t's targets are shifted by t.
inline fedcl::InMemoryProvider random_provider(const fedcl::LstmSpec& spec, std::size_t clients,
                                               std::size_t tasks, std::size_t m_train,
                                               std::size_t m_test, std::uint64_t seed) {
  std::vector<std::vector<fedcl::TaskSplit>> splits(clients);
  for (std::size_t k = 0; k < clients; ++k) {
    for (std::size_t t = 0; t <= tasks; ++t) {
      fedcl::TaskSplit s;
      const std::uint64_t base = seed * 1000 + k * 100 + t * 10;
      s.train.x = random_tensor({m_train, spec.lag, spec.input_dim}, base);
      s.train.y = random_tensor({m_train, spec.horizon}, base + 1, -0.5 + 0.3 * t, 0.5 + 0.3 * t);
      s.test.x = random_tensor({m_test, spec.lag, spec.input_dim}, base + 2);
      s.test.y = random_tensor({m_test, spec.horizon}, base + 3, -0.5 + 0.3 * t, 0.5 + 0.3 * t);
      s.train.client_id = s.test.client_id = static_cast<int>(k);
      s.train.task_index = s.test.task_index = static_cast<int>(t);
      s.test.split = fedcl::Split::test;
      splits[k].push_back(std::move(s));
    }
  }
  return fedcl::InMemoryProvider(std::move(splits));
}

}  // namespace testsupport
