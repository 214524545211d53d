#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "fedcl/cl/kmeans.hpp"
#include "fedcl/data/windowing.hpp"

namespace fedcl {

/// Indices of k-means representatives of the train inputs, k = exemplar_count(ratio, M).
/// Empty for an empty dataset.
std::vector<std::size_t> replay_select(const WindowedDataset& train, double ratio,
                                       std::uint64_t seed, Exec exec = Exec::parallel);

struct ReplayTask {
  int task = 0;
  Tensor x;  // [m, n, d]
  Tensor y;  // [m, p]
};

class ReplayBuffer {
 public:
  /// Stores the selected windows of a finished task. Re-adding a task is an error.
  void add(int task, const WindowedDataset& train, std::span<const std::size_t> indices);
  void add(ReplayTask stored);

  std::size_t size() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }
  bool holds_task(int task) const noexcept;
  const std::vector<ReplayTask>& tasks() const noexcept { return tasks_; }

  /// min(batch, size()) exemplars drawn uniformly without replacement from all tasks.
  std::pair<Tensor, Tensor> sample(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::vector<ReplayTask> tasks_;
  std::size_t total_ = 0;
};

}  // namespace fedcl
