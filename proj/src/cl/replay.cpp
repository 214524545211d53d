#include "fedcl/cl/replay.hpp"

#include <algorithm>
#include <numeric>

#include "fedcl/errors.hpp"

namespace fedcl {

std::vector<std::size_t> replay_select(const WindowedDataset& train, double ratio,
                                       std::uint64_t seed, Exec exec) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("replay ratio must lie in (0, 1]");
  if (train.empty()) return {};
  const std::size_t k = exemplar_count(ratio, train.size());
  if (k == train.size()) {
    std::vector<std::size_t> all(k);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  return nearest_members(train.x, kmeans(train.x, k, seed, {}, exec));
}

bool ReplayBuffer::holds_task(int task) const noexcept {
  return std::any_of(tasks_.begin(), tasks_.end(), [&](const ReplayTask& t) { return t.task == task; });
}

void ReplayBuffer::add(int task, const WindowedDataset& train, std::span<const std::size_t> indices) {
  add(ReplayTask{task, train.x.gather_rows(indices), train.y.gather_rows(indices)});
}

void ReplayBuffer::add(ReplayTask stored) {
  if (holds_task(stored.task)) throw ConfigError("replay buffer already holds task " + std::to_string(stored.task));
  if (stored.x.rank() != 3 || stored.y.rank() != 2 || stored.x.dim(0) != stored.y.dim(0))
    throw ShapeError("replay exemplars need x [m,n,d] and y [m,p]");
  if (!tasks_.empty() && (stored.x.dim(1) != tasks_[0].x.dim(1) || stored.x.dim(2) != tasks_[0].x.dim(2) ||
                          stored.y.dim(1) != tasks_[0].y.dim(1)))
    throw ShapeError("replay exemplars disagree in window shape");
  total_ += stored.x.dim(0);
  tasks_.push_back(std::move(stored));
}

std::pair<Tensor, Tensor> ReplayBuffer::sample(std::size_t batch, std::mt19937_64& rng) const {
  if (empty()) return {Tensor(), Tensor()};
  const std::size_t b = std::min(batch, total_);
  std::vector<std::size_t> all(total_);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  picked.reserve(b);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), b, rng);

  const auto& ref = tasks_.front();
  Tensor x({b, ref.x.dim(1), ref.x.dim(2)});
  Tensor y({b, ref.y.dim(1)});
  const std::size_t xw = ref.x.row_size(), yw = ref.y.row_size();
  for (std::size_t r = 0; r < b; ++r) {
    std::size_t idx = picked[r];
    std::size_t t = 0;
    while (idx >= tasks_[t].x.dim(0)) idx -= tasks_[t++].x.dim(0);
    std::copy_n(tasks_[t].x.data().begin() + idx * xw, xw, x.data().begin() + r * xw);
    std::copy_n(tasks_[t].y.data().begin() + idx * yw, yw, y.data().begin() + r * yw);
  }
  return {std::move(x), std::move(y)};
}

}  // namespace fedcl
