#include "fedcl/eval/evaluate.hpp"

#include <cmath>

#include "fedcl/errors.hpp"

namespace fedcl {

SquaredError squared_error(const LstmSpec& spec, const ParamVector& theta, const WindowedDataset& data,
                           Exec exec) {
  if (data.empty()) return {};
  const Tensor pred = lstm_forward(spec, theta, data.x, exec);
  if (pred.shape() != data.y.shape()) throw ShapeError("evaluation targets do not match the model horizon");
  SquaredError out{0.0, pred.size()};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - data.y.data()[i];
    out.sse += d * d;
  }
  return out;
}

std::optional<double> pooled_rmse(const LstmSpec& spec, const ParamVector& theta,
                                  std::span<const WindowedDataset* const> parts, Exec exec) {
  SquaredError total;
  for (const WindowedDataset* d : parts) {
    const SquaredError e = squared_error(spec, theta, *d, exec);
    total.sse += e.sse;
    total.count += e.count;
  }
  if (total.count == 0) return std::nullopt;
  const double r = std::sqrt(total.sse / static_cast<double>(total.count));
  if (!std::isfinite(r)) throw NonFiniteError("evaluation produced a non-finite error");
  return r;
}

}  // namespace fedcl
