#include "fedcl/core/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace {

constexpr std::size_t kRowsPerChunk = 8;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Within an ulp or two of std::tanh and about twice as fast.
inline double fast_tanh(double z) {
  const double e = std::expm1(-2.0 * std::abs(z));
  return std::copysign(-e / (e + 2.0), z);
}

// Per (layer, step) cache block: gates[4h] (activated), c[h], tanh(c)[h], h[h].
struct CacheView {
  std::size_t h;
  std::size_t steps;
  double* base;

  std::size_t block() const { return 7 * h; }
  double* at(std::size_t layer, std::size_t t) const { return base + (layer * steps + t) * block(); }
  double* gates(std::size_t layer, std::size_t t) const { return at(layer, t); }
  double* cell(std::size_t layer, std::size_t t) const { return at(layer, t) + 4 * h; }
  double* tanh_cell(std::size_t layer, std::size_t t) const { return at(layer, t) + 5 * h; }
  double* hidden(std::size_t layer, std::size_t t) const { return at(layer, t) + 6 * h; }
};

// Input and recurrent weights of every layer stored column-major ([in][4h] and
// [h][4h]) so the gate pre-activations accumulate as contiguous axpys. Each
// pre-activation still sums its terms in column order.
struct TransposedWeights {
  std::vector<std::vector<double>> w_x;
  std::vector<std::vector<double>> w_h;

  TransposedWeights(const LstmSpec& spec, const detail::LstmOffsets& off, const double* theta) {
    const std::size_t g = 4 * spec.hidden_dim;
    for (std::size_t l = 0; l < spec.num_layers; ++l) {
      const std::size_t in = (l == 0) ? spec.input_dim : spec.hidden_dim;
      w_x.push_back(transpose(theta + off.w_x[l], g, in));
      w_h.push_back(transpose(theta + off.w_h[l], g, spec.hidden_dim));
    }
  }

  static std::vector<double> transpose(const double* m, std::size_t rows, std::size_t cols) {
    std::vector<double> t(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = m[r * cols + c];
    return t;
  }
};

void forward_sample(const LstmSpec& spec, const detail::LstmOffsets& off, const double* theta,
                    const TransposedWeights& wt, const double* x, const CacheView& cache, double* out,
                    std::vector<double>& z) {
  const std::size_t h = spec.hidden_dim;
  const std::size_t n = spec.lag;
  const std::size_t d = spec.input_dim;
  z.resize(4 * h);
  for (std::size_t l = 0; l < spec.num_layers; ++l) {
    const std::size_t in = (l == 0) ? d : h;
    const std::size_t g4 = 4 * h;
    const double* wxt = wt.w_x[l].data();
    const double* wht = wt.w_h[l].data();
    const double* b = theta + off.bias[l];
    double* zp = z.data();
    for (std::size_t t = 0; t < n; ++t) {
      const double* xin = (l == 0) ? x + t * d : cache.hidden(l - 1, t);
      const double* hprev = (t == 0) ? nullptr : cache.hidden(l, t - 1);
      const double* cprev = (t == 0) ? nullptr : cache.cell(l, t - 1);
      std::copy(b, b + g4, zp);
      for (std::size_t c = 0; c < in; ++c) {
        const double xc = xin[c];
        const double* col = wxt + c * g4;
        for (std::size_t r = 0; r < g4; ++r) zp[r] += col[r] * xc;
      }
      if (hprev != nullptr) {
        for (std::size_t c = 0; c < h; ++c) {
          const double hc = hprev[c];
          const double* col = wht + c * g4;
          for (std::size_t r = 0; r < g4; ++r) zp[r] += col[r] * hc;
        }
      }
      double* gates = cache.gates(l, t);
      double* cell = cache.cell(l, t);
      double* tc = cache.tanh_cell(l, t);
      double* hid = cache.hidden(l, t);
      for (std::size_t j = 0; j < h; ++j) {
        const double i_g = sigmoid(z[j]);
        const double f_g = sigmoid(z[h + j]);
        const double g_g = fast_tanh(z[2 * h + j]);
        const double o_g = sigmoid(z[3 * h + j]);
        gates[j] = i_g;
        gates[h + j] = f_g;
        gates[2 * h + j] = g_g;
        gates[3 * h + j] = o_g;
        const double c_prev = (cprev != nullptr) ? cprev[j] : 0.0;
        cell[j] = f_g * c_prev + i_g * g_g;
        tc[j] = fast_tanh(cell[j]);
        hid[j] = o_g * tc[j];
      }
    }
  }
  const double* hw = theta + off.head_w;
  const double* hb = theta + off.head_b;
  const double* last = cache.hidden(spec.num_layers - 1, n - 1);
  for (std::size_t k = 0; k < spec.horizon; ++k) {
    double acc = hb[k];
    for (std::size_t j = 0; j < h; ++j) acc += hw[k * h + j] * last[j];
    out[k] = acc;
  }
}

struct BackwardScratch {
  std::vector<double> dh_above;  // [n * h]
  std::vector<double> dx_below;  // [n * h]
  std::vector<double> dh_rec;
  std::vector<double> dc_rec;
  std::vector<double> dz;
};

void backward_sample(const LstmSpec& spec, const detail::LstmOffsets& off, const double* theta,
                     const double* x, const CacheView& cache, const double* dy, double* grad,
                     BackwardScratch& s) {
  const std::size_t h = spec.hidden_dim;
  const std::size_t n = spec.lag;
  const std::size_t d = spec.input_dim;
  const std::size_t top = spec.num_layers - 1;

  s.dh_above.assign(n * h, 0.0);
  s.dx_below.assign(n * h, 0.0);
  s.dh_rec.assign(h, 0.0);
  s.dc_rec.assign(h, 0.0);
  s.dz.assign(4 * h, 0.0);

  const double* hw = theta + off.head_w;
  double* g_hw = grad + off.head_w;
  double* g_hb = grad + off.head_b;
  const double* last = cache.hidden(top, n - 1);
  double* dh_last = s.dh_above.data() + (n - 1) * h;
  for (std::size_t k = 0; k < spec.horizon; ++k) {
    const double g = dy[k];
    g_hb[k] += g;
    for (std::size_t j = 0; j < h; ++j) {
      g_hw[k * h + j] += g * last[j];
      dh_last[j] += g * hw[k * h + j];
    }
  }

  for (std::size_t li = 0; li < spec.num_layers; ++li) {
    const std::size_t l = top - li;
    const std::size_t in = (l == 0) ? d : h;
    const double* wx = theta + off.w_x[l];
    const double* wh = theta + off.w_h[l];
    double* g_wx = grad + off.w_x[l];
    double* g_wh = grad + off.w_h[l];
    double* g_b = grad + off.bias[l];
    std::fill(s.dh_rec.begin(), s.dh_rec.end(), 0.0);
    std::fill(s.dc_rec.begin(), s.dc_rec.end(), 0.0);
    if (l > 0) std::fill(s.dx_below.begin(), s.dx_below.end(), 0.0);

    for (std::size_t ti = 0; ti < n; ++ti) {
      const std::size_t t = n - 1 - ti;
      const double* gates = cache.gates(l, t);
      const double* tc = cache.tanh_cell(l, t);
      const double* cprev = (t == 0) ? nullptr : cache.cell(l, t - 1);
      const double* hprev = (t == 0) ? nullptr : cache.hidden(l, t - 1);
      const double* xin = (l == 0) ? x + t * d : cache.hidden(l - 1, t);
      const double* dh_in = s.dh_above.data() + t * h;

      for (std::size_t j = 0; j < h; ++j) {
        const double i_g = gates[j];
        const double f_g = gates[h + j];
        const double g_g = gates[2 * h + j];
        const double o_g = gates[3 * h + j];
        const double dh = dh_in[j] + s.dh_rec[j];
        const double dc = s.dc_rec[j] + dh * o_g * (1.0 - tc[j] * tc[j]);
        const double c_prev = (cprev != nullptr) ? cprev[j] : 0.0;
        s.dz[j] = dc * g_g * i_g * (1.0 - i_g);
        s.dz[h + j] = dc * c_prev * f_g * (1.0 - f_g);
        s.dz[2 * h + j] = dc * i_g * (1.0 - g_g * g_g);
        s.dz[3 * h + j] = dh * tc[j] * o_g * (1.0 - o_g);
        s.dc_rec[j] = dc * f_g;
      }

      std::fill(s.dh_rec.begin(), s.dh_rec.end(), 0.0);
      for (std::size_t r = 0; r < 4 * h; ++r) {
        const double dzr = s.dz[r];
        g_b[r] += dzr;
        double* gx = g_wx + r * in;
        for (std::size_t c = 0; c < in; ++c) gx[c] += dzr * xin[c];
        if (hprev != nullptr) {
          double* gh = g_wh + r * h;
          const double* whr = wh + r * h;
          for (std::size_t c = 0; c < h; ++c) {
            gh[c] += dzr * hprev[c];
            s.dh_rec[c] += whr[c] * dzr;
          }
        }
        if (l > 0) {
          const double* wxr = wx + r * in;
          double* dxb = s.dx_below.data() + t * h;
          for (std::size_t c = 0; c < in; ++c) dxb[c] += wxr[c] * dzr;
        }
      }
    }
    if (l > 0) s.dh_above.swap(s.dx_below);
  }
}

}  // namespace

void LstmSpec::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || num_layers < 1 || horizon < 1 || lag < 1) {
    throw ConfigError("LSTM dimensions must all be >= 1");
  }
}

LayoutPtr make_layout(const LstmSpec& spec) {
  spec.validate();
  const std::size_t h = spec.hidden_dim;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> parts;
  for (std::size_t l = 0; l < spec.num_layers; ++l) {
    const std::size_t in = (l == 0) ? spec.input_dim : h;
    const std::string p = "lstm" + std::to_string(l) + ".";
    parts.push_back({p + "w_x", {4 * h, in}});
    parts.push_back({p + "w_h", {4 * h, h}});
    parts.push_back({p + "b", {4 * h}});
  }
  parts.push_back({"head.w", {spec.horizon, h}});
  parts.push_back({"head.b", {spec.horizon}});
  const std::string name = "lstm-d" + std::to_string(spec.input_dim) + "-h" + std::to_string(h) +
                           "-l" + std::to_string(spec.num_layers) + "-p" +
                           std::to_string(spec.horizon);
  return std::make_shared<const Layout>(name, parts);
}

ParamVector init_params(const LstmSpec& spec, std::uint64_t seed) {
  ParamVector theta(make_layout(spec));
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (const Segment& s : theta.layout().segments()) {
    if (s.shape.size() != 2) continue;  // biases stay zero
    auto seg = theta.values().subspan(s.offset, s.size());
    for (double& v : seg) v = dist(rng);
  }
  return theta;
}

void require_layout(const LstmSpec& spec, const ParamVector& theta) {
  if (!theta.layout_ptr() || !(theta.layout() == *make_layout(spec))) {
    throw LayoutError("parameter layout does not match the LSTM configuration");
  }
}

void require_batch_shape(const LstmSpec& spec, const Tensor& batch_x) {
  if (batch_x.rank() != 3 || batch_x.dim(1) != spec.lag || batch_x.dim(2) != spec.input_dim) {
    throw ShapeError("batch must have shape [B, " + std::to_string(spec.lag) + ", " +
                     std::to_string(spec.input_dim) + "]");
  }
  require_finite(batch_x, "batch input");
}

namespace detail {

LstmOffsets offsets_for(const LstmSpec& spec) {
  LstmOffsets off;
  const std::size_t h = spec.hidden_dim;
  std::size_t pos = 0;
  for (std::size_t l = 0; l < spec.num_layers; ++l) {
    const std::size_t in = (l == 0) ? spec.input_dim : h;
    off.w_x.push_back(pos);
    pos += 4 * h * in;
    off.w_h.push_back(pos);
    pos += 4 * h * h;
    off.bias.push_back(pos);
    pos += 4 * h;
  }
  off.head_w = pos;
  pos += spec.horizon * h;
  off.head_b = pos;
  pos += spec.horizon;
  off.total = pos;
  return off;
}

}  // namespace detail

LstmTape::LstmTape(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x, Exec exec)
    : spec_(spec), off_(detail::offsets_for(spec)), theta_(theta.values()), batch_x_(&batch_x),
      exec_(exec) {
  require_layout(spec, theta);
  require_batch_shape(spec, batch_x);
  batch_ = batch_x.dim(0);
  cache_stride_ = spec.num_layers * spec.lag * 7 * spec.hidden_dim;
  cache_.assign(batch_ * cache_stride_, 0.0);
  predictions_ = Tensor({batch_, spec.horizon});

  const long rows = static_cast<long>(batch_);
  const double* th = theta_.data();
  const TransposedWeights wt(spec_, off_, th);
  if (exec_ == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<double> z;
#pragma omp for schedule(static)
      for (long b = 0; b < rows; ++b) {
        CacheView cv{spec_.hidden_dim, spec_.lag, cache_.data() + b * cache_stride_};
        forward_sample(spec_, off_, th, wt, batch_x.row(b).data(), cv, predictions_.row(b).data(), z);
      }
    }
  } else {
    std::vector<double> z;
    for (long b = 0; b < rows; ++b) {
      CacheView cv{spec_.hidden_dim, spec_.lag, cache_.data() + b * cache_stride_};
      forward_sample(spec_, off_, th, wt, batch_x.row(b).data(), cv, predictions_.row(b).data(), z);
    }
  }
}

void LstmTape::accumulate_gradient(const Tensor& dpred, ParamVector& grad) const {
  if (dpred.shape() != predictions_.shape()) {
    throw ShapeError("prediction gradient shape does not match predictions");
  }
  if (grad.size() != off_.total) throw LayoutError("gradient buffer does not match the model");
  const double* th = theta_.data();
  const std::size_t total = off_.total;
  // Cache is read-only here; CacheView only needs a mutable pointer type.
  double* cache = const_cast<double*>(cache_.data());

  if (exec_ == Exec::serial) {
    BackwardScratch s;
    for (std::size_t b = 0; b < batch_; ++b) {
      CacheView cv{spec_.hidden_dim, spec_.lag, cache + b * cache_stride_};
      backward_sample(spec_, off_, th, batch_x_->row(b).data(), cv, dpred.row(b).data(),
                      grad.values().data(), s);
    }
    return;
  }

  // Rows are grouped into fixed-size chunks; each chunk sums serially into its
  // own buffer and the buffers are reduced in chunk order, so the result is
  // independent of how many threads ran the chunks.
  const long chunks = static_cast<long>((batch_ + kRowsPerChunk - 1) / kRowsPerChunk);
  std::vector<double> partial(static_cast<std::size_t>(chunks) * total, 0.0);
#pragma omp parallel
  {
    BackwardScratch s;
#pragma omp for schedule(static)
    for (long ch = 0; ch < chunks; ++ch) {
      double* out = partial.data() + ch * total;
      const std::size_t begin = static_cast<std::size_t>(ch) * kRowsPerChunk;
      const std::size_t end = std::min(batch_, begin + kRowsPerChunk);
      for (std::size_t b = begin; b < end; ++b) {
        CacheView cv{spec_.hidden_dim, spec_.lag, cache + b * cache_stride_};
        backward_sample(spec_, off_, th, batch_x_->row(b).data(), cv, dpred.row(b).data(), out, s);
      }
    }
  }
  double* g = grad.values().data();
  for (long ch = 0; ch < chunks; ++ch) {
    const double* src = partial.data() + ch * total;
    for (std::size_t i = 0; i < total; ++i) g[i] += src[i];
  }
}

Tensor lstm_forward(const LstmSpec& spec, const ParamVector& theta, const Tensor& batch_x,
                    Exec exec) {
  require_layout(spec, theta);
  require_batch_shape(spec, batch_x);
  const std::size_t batch = batch_x.dim(0);
  const auto off = detail::offsets_for(spec);
  Tensor out({batch, spec.horizon});
  const std::size_t stride = spec.num_layers * spec.lag * 7 * spec.hidden_dim;
  const long rows = static_cast<long>(batch);
  const double* th = theta.values().data();
  const TransposedWeights wt(spec, off, th);
  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<double> cache(stride);
      std::vector<double> z;
#pragma omp for schedule(static)
      for (long b = 0; b < rows; ++b) {
        CacheView cv{spec.hidden_dim, spec.lag, cache.data()};
        forward_sample(spec, off, th, wt, batch_x.row(b).data(), cv, out.row(b).data(), z);
      }
    }
  } else {
    std::vector<double> cache(stride);
    std::vector<double> z;
    for (long b = 0; b < rows; ++b) {
      CacheView cv{spec.hidden_dim, spec.lag, cache.data()};
      forward_sample(spec, off, th, wt, batch_x.row(b).data(), cv, out.row(b).data(), z);
    }
  }
  return out;
}

}  // namespace fedcl
