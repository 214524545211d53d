#pragma once

#include <cstddef>
#include <vector>

#include "fedcl/core/tensor.hpp"
#include "fedcl/data/preprocess.hpp"
#include "fedcl/data/schedule.hpp"

namespace fedcl {

enum class Split { train, test };

/// Supervised windows for one client, task and split.
/// x: [M, n, d] lagged inputs; y: [M, p] following target values.
struct WindowedDataset {
  Tensor x;
  Tensor y;
  int client_id = 0;
  int task_index = 0;
  Split split = Split::train;
  /// Timestamp of the first input row of each window.
  std::vector<HourStamp> starts;

  std::size_t size() const noexcept { return x.rank() == 0 ? 0 : x.dim(0); }
  bool empty() const noexcept { return size() == 0; }
};

struct TaskSplit {
  WindowedDataset train;
  WindowedDataset test;
};

struct WindowOptions {
  std::size_t lag = 12;
  std::size_t horizon = 6;
  double train_fraction = 0.8;
  /// Keep the target column among the inputs (autoregressive).
  bool target_as_input = true;
};

/// max(0, T - n - p + 1)
std::size_t window_count(std::size_t segment_rows, std::size_t lag, std::size_t horizon) noexcept;

/// Number of input features per time step for `matrix` under `options`.
std::size_t input_width(const FeatureMatrix& matrix, const WindowOptions& options);

/// Windows built only from rows inside `range`; the first ceil(f * M) windows
/// form the train split and the rest the test split. Segments shorter than
/// n + p yield empty splits and a warning.
TaskSplit window_task(const FeatureMatrix& matrix, const TimeRange& range,
                      const WindowOptions& options, int client_id, int task_index);

/// Empty dataset with the right trailing dimensions.
WindowedDataset empty_dataset(std::size_t lag, std::size_t width, std::size_t horizon,
                              int client_id, int task_index, Split split);

}  // namespace fedcl
