#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedcl/core/param_vector.hpp"

namespace fedcl {

struct ClientUpdate {
  int client = 0;
  ParamVector theta;
  std::size_t samples = 0;
};

/// n_k / n for each count; throws AggregationError when every count is zero.
std::vector<double> fedavg_weights(std::span<const std::size_t> samples);

/// sum_k (n_k / n) theta_k over updates with n_k > 0, accumulated in ascending
/// client-id order as theta_first + sum_k w_k (theta_k - theta_first), which keeps
/// identical updates (and a lone update) exact.
ParamVector fedavg_aggregate(std::span<const ClientUpdate> updates);

}  // namespace fedcl
