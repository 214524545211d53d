#include "fedcl/data/windowing.hpp"

#include <cmath>
#include <string>

#include "fedcl/errors.hpp"
#include "fedcl/log.hpp"

namespace fedcl {

std::size_t window_count(std::size_t segment_rows, std::size_t lag, std::size_t horizon) noexcept {
  return segment_rows >= lag + horizon ? segment_rows - lag - horizon + 1 : 0;
}

std::size_t input_width(const FeatureMatrix& matrix, const WindowOptions& options) {
  return options.target_as_input ? matrix.width() : matrix.width() - 1;
}

WindowedDataset empty_dataset(std::size_t lag, std::size_t width, std::size_t horizon,
                              int client_id, int task_index, Split split) {
  WindowedDataset d;
  d.x = Tensor({0, lag, width});
  d.y = Tensor({0, horizon});
  d.client_id = client_id;
  d.task_index = task_index;
  d.split = split;
  return d;
}

TaskSplit window_task(const FeatureMatrix& matrix, const TimeRange& range,
                      const WindowOptions& options, int client_id, int task_index) {
  if (options.lag < 1 || options.horizon < 1) throw ConfigError("lag and horizon must be >= 1");
  if (!(options.train_fraction > 0.0 && options.train_fraction <= 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1]");
  }
  const std::size_t target = matrix.column_index(matrix.target_column);
  const std::size_t width = input_width(matrix, options);
  const FeatureMatrix seg = matrix.slice(range.begin, range.end);
  const std::size_t rows = seg.rows();
  const std::size_t m = window_count(rows, options.lag, options.horizon);

  TaskSplit out{empty_dataset(options.lag, width, options.horizon, client_id, task_index, Split::train),
                empty_dataset(options.lag, width, options.horizon, client_id, task_index, Split::test)};
  if (m == 0) {
    log::warn("client " + std::to_string(client_id) + " task " + std::to_string(task_index) +
              ": segment of " + std::to_string(rows) + " rows is shorter than lag + horizon");
    return out;
  }
  for (std::size_t r = 1; r < rows; ++r) {
    if (seg.times[r] != seg.times[r - 1] + 1) {
      throw Error("feature matrix rows are not on a contiguous hourly grid");
    }
  }

  const auto n_train = static_cast<std::size_t>(std::ceil(options.train_fraction * static_cast<double>(m)));
  const std::size_t w_all = seg.width();
  auto fill = [&](WindowedDataset& ds, std::size_t first, std::size_t count) {
    ds.x = Tensor({count, options.lag, width});
    ds.y = Tensor({count, options.horizon});
    ds.starts.resize(count);
    const auto src = seg.values.data();
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t t0 = first + k;
      ds.starts[k] = seg.times[t0];
      auto xrow = ds.x.row(k);
      std::size_t pos = 0;
      for (std::size_t t = 0; t < options.lag; ++t) {
        const double* row = src.data() + (t0 + t) * w_all;
        for (std::size_t c = 0; c < w_all; ++c) {
          if (!options.target_as_input && c == target) continue;
          xrow[pos++] = row[c];
        }
      }
      for (std::size_t j = 0; j < options.horizon; ++j) {
        ds.y.at(k, j) = src[(t0 + options.lag + j) * w_all + target];
      }
    }
  };
  fill(out.train, 0, n_train);
  fill(out.test, n_train, m - n_train);
  return out;
}

}  // namespace fedcl
