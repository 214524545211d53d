#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "fedcl/core/lstm.hpp"
#include "fedcl/data/windowing.hpp"

namespace fedcl {

struct SquaredError {
  double sse = 0.0;
  std::size_t count = 0;  // number of scalar predictions
};

/// Sum of squared errors of f_theta over a dataset, accumulated in row order.
SquaredError squared_error(const LstmSpec& spec, const ParamVector& theta, const WindowedDataset& data,
                           Exec exec = Exec::parallel);

/// RMSE over the union of the given datasets, summed in the order given.
/// Null when they hold no windows at all.
std::optional<double> pooled_rmse(const LstmSpec& spec, const ParamVector& theta,
                                  std::span<const WindowedDataset* const> parts, Exec exec = Exec::parallel);

}  // namespace fedcl
