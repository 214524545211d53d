#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedcl/core/param_vector.hpp"
#include "fedcl/core/tensor.hpp"

namespace fedcl {

/// Stacked LSTM followed by a linear head on the last hidden state.
struct LstmSpec {
  std::size_t input_dim = 1;   // d
  std::size_t hidden_dim = 64; // h
  std::size_t num_layers = 1;
  std::size_t horizon = 6;     // p
  std::size_t lag = 12;        // n

  /// Throws ConfigError if any dimension is zero.
  void validate() const;
  friend bool operator==(const LstmSpec&, const LstmSpec&) = default;
};

/// Execution policy for the batch kernels. `parallel` uses OpenMP with a
/// reduction order that does not depend on the thread count; `serial` is the
/// plain reference loop kept for testing and benchmarking.
enum class Exec { serial, parallel };

/// Segments per layer l: "lstm{l}.w_x" [4h, in], "lstm{l}.w_h" [4h, h],
/// "lstm{l}.b" [4h]; then "head.w" [p, h] and "head.b" [p].
/// Gate rows are ordered input, forget, candidate, output.
LayoutPtr make_layout(const LstmSpec& spec);

/// Weights ~ uniform(-1/sqrt(h), 1/sqrt(h)), biases zero.
ParamVector init_params(const LstmSpec& spec, std::uint64_t seed);

/// Throws LayoutError when theta was not built for `spec`.
void require_layout(const LstmSpec& spec, const ParamVector& theta);

namespace detail {

struct LstmOffsets {
  std::vector<std::size_t> w_x;
  std::vector<std::size_t> w_h;
  std::vector<std::size_t> bias;
  std::size_t head_w = 0;
  std::size_t head_b = 0;
  std::size_t total = 0;
};

LstmOffsets offsets_for(const LstmSpec& spec);

}  // namespace detail

/// Activations of one batch forward pass. Keeps a view of theta, which must
/// outlive the tape.
class LstmTape {
 public:
  LstmTape(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
           Exec exec = Exec::parallel);

  const Tensor& predictions() const noexcept { return predictions_; }
  std::size_t batch_size() const noexcept { return batch_; }

  /// grad += d(loss)/d(theta) given d(loss)/d(predictions).
  void accumulate_gradient(const Tensor& dpred, ParamVector& grad) const;

 private:
  LstmSpec spec_;
  detail::LstmOffsets off_;
  std::span<const double> theta_;
  const Tensor* batch_x_;
  Exec exec_;
  std::size_t batch_ = 0;
  std::size_t cache_stride_ = 0;
  std::vector<double> cache_;
  Tensor predictions_;
};

/// f_theta(batch_x): [B, n, d] -> [B, p]. Hidden and cell states start at zero.
Tensor lstm_forward(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
                    Exec exec = Exec::parallel);

/// Validates that batch_x has shape [B, n, d] for `spec` and finite entries.
void require_batch_shape(const LstmSpec& spec, const Tensor& batch_x);

}  // namespace fedcl
