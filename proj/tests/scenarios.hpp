#pragma once

// Small constructed federated scenarios for forgetting and transfer checks.
// Each window holds a noisy sinusoid fragment; the target is its continuation.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fedcl/core/seed.hpp"
#include "fedcl/fed/provider.hpp"

namespace scenarios {

struct TaskShape {
  double target_sign = 1.0;   // y = sign * continuation
  double marker = 0.0;        // constant second input channel
  double input_noise = 0.0;
  double target_noise = 0.0;
  int copy_of = -1;           // reuse that task's clean windows
};

struct ScenarioSize {
  std::size_t clients = 2;
  std::size_t lag = 6;
  std::size_t horizon = 2;
  std::size_t train = 256;
  std::size_t test = 64;
};

inline fedcl::WindowedDataset make_windows(const ScenarioSize& size, const TaskShape& shape, std::size_t count,
                                           std::uint64_t seed, fedcl::Split split) {
  std::mt19937_64 rng(seed);
  std::mt19937_64 noise_rng(fedcl::splitmix64(seed));
  std::uniform_real_distribution<double> amp(0.3, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> freq(0.3, 0.7);
  std::normal_distribution<double> noise(0.0, 1.0);
  fedcl::WindowedDataset w;
  w.x = fedcl::Tensor({count, size.lag, 2});
  w.y = fedcl::Tensor({count, size.horizon});
  w.split = split;
  for (std::size_t i = 0; i < count; ++i) {
    const double a = amp(rng);
    const double p = phase(rng);
    const double f = freq(rng);
    auto x = w.x.row(i);
    for (std::size_t t = 0; t < size.lag; ++t) {
      x[2 * t] = a * std::sin(f * static_cast<double>(t) + p) + shape.input_noise * noise(noise_rng);
      x[2 * t + 1] = shape.marker;
    }
    auto y = w.y.row(i);
    for (std::size_t k = 0; k < size.horizon; ++k) {
      y[k] = shape.target_sign * a * std::sin(f * static_cast<double>(size.lag + k) + p) +
             shape.target_noise * noise(noise_rng);
    }
  }
  return w;
}

/// tasks[0] is the base task. Every client draws its own windows.
inline fedcl::InMemoryProvider build(const ScenarioSize& size, const std::vector<TaskShape>& tasks,
                                     std::uint64_t data_seed) {
  std::vector<std::vector<fedcl::TaskSplit>> splits(size.clients);
  for (std::size_t k = 0; k < size.clients; ++k) {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const std::size_t source = tasks[t].copy_of >= 0 ? static_cast<std::size_t>(tasks[t].copy_of) : t;
      const std::uint64_t s = fedcl::derive_seed(data_seed, {k, source});
      fedcl::TaskSplit split;
      split.train = make_windows(size, tasks[t], size.train, s, fedcl::Split::train);
      split.test = make_windows(size, tasks[t], size.test, s + 1, fedcl::Split::test);
      for (auto* d : {&split.train, &split.test}) {
        d->client_id = static_cast<int>(k);
        d->task_index = static_cast<int>(t);
      }
      splits[k].push_back(std::move(split));
    }
  }
  return fedcl::InMemoryProvider(std::move(splits));
}

/// Base and task 1 share one mapping; task 2 negates it under a different marker.
inline fedcl::InMemoryProvider conflicting(std::uint64_t data_seed) {
  const TaskShape a{.target_sign = 1.0, .marker = 0.5};
  const TaskShape b{.target_sign = -1.0, .marker = -0.5};
  return build({}, {a, a, b}, data_seed);
}

/// Task 2 is task 1's windows with noise added to the targets.
inline fedcl::InMemoryProvider noisier_copy(std::uint64_t data_seed) {
  const TaskShape clean{};
  const TaskShape noisy{.target_noise = 0.3, .copy_of = 1};
  return build({}, {clean, clean, noisy}, data_seed);
}

}  // namespace scenarios
