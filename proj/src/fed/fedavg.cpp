#include "fedcl/fed/fedavg.hpp"

#include <algorithm>
#include <cmath>

#include "fedcl/errors.hpp"

namespace fedcl {

std::vector<double> fedavg_weights(std::span<const std::size_t> samples) {
  std::size_t n = 0;
  for (std::size_t s : samples) n += s;
  if (n == 0) throw AggregationError("no client contributed samples this round");
  std::vector<double> w;
  w.reserve(samples.size());
  double total = 0.0;
  for (std::size_t s : samples) {
    w.push_back(static_cast<double>(s) / static_cast<double>(n));
    total += w.back();
  }
  if (std::abs(total - 1.0) >= 1e-12) throw AggregationError("aggregation weights do not sum to one");
  return w;
}

ParamVector fedavg_aggregate(std::span<const ClientUpdate> updates) {
  std::vector<const ClientUpdate*> live;
  for (const auto& u : updates)
    if (u.samples > 0) live.push_back(&u);
  if (live.empty()) throw AggregationError("no client contributed samples this round");
  std::sort(live.begin(), live.end(), [](const ClientUpdate* a, const ClientUpdate* b) { return a->client < b->client; });
  for (std::size_t i = 1; i < live.size(); ++i) {
    if (live[i]->client == live[i - 1]->client) throw AggregationError("duplicate update from one client");
    live[0]->theta.require_same_layout(live[i]->theta, "fedavg_aggregate");
  }
  std::vector<std::size_t> counts;
  for (const auto* u : live) counts.push_back(u->samples);
  const std::vector<double> w = fedavg_weights(counts);

  const ParamVector& first = live[0]->theta;
  ParamVector out = first;
  for (std::size_t k = 1; k < live.size(); ++k) {
    const ParamVector& t = live[k]->theta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[k] * (t[i] - first[i]);
  }
  return out;
}

}  // namespace fedcl
