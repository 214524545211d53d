#include "fedcl/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "fedcl/errors.hpp"

namespace fedcl {

double rmse(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) throw ShapeError("rmse: prediction and target shapes differ");
  if (pred.size() == 0) throw ShapeError("rmse: empty input");
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    sse += d * d;
  }
  return std::sqrt(sse / static_cast<double>(pred.size()));
}

PerformanceMatrix::PerformanceMatrix(std::size_t n) : n_(n), cells_(n * n) {
  if (n == 0) throw ConfigError("performance matrix needs at least one task");
}

void PerformanceMatrix::set(std::size_t i, std::size_t j, std::optional<double> value) {
  if (i >= n_ || j >= n_) throw ShapeError("performance matrix index out of range");
  if (value && !(std::isfinite(*value) && *value >= 0.0))
    throw NonFiniteError("performance matrix entries must be finite and nonnegative");
  cells_[i * n_ + j] = value;
}

std::optional<double> PerformanceMatrix::get(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw ShapeError("performance matrix index out of range");
  return cells_[i * n_ + j];
}

std::span<const std::optional<double>> PerformanceMatrix::row(std::size_t i) const {
  if (i >= n_) throw ShapeError("performance matrix row out of range");
  return std::span(cells_).subspan(i * n_, n_);
}

PerformanceMatrix PerformanceMatrix::scaled(double factor) const {
  PerformanceMatrix out = *this;
  for (auto& c : out.cells_)
    if (c) *c *= factor;
  return out;
}

void PerformanceMatrix::write_csv(std::ostream& out) const {
  out << "model_after_task,test_task,rmse\n";
  char buf[64];
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      out << i + 1 << ',' << j + 1 << ',';
      if (const auto& v = cells_[i * n_ + j]) {
        std::snprintf(buf, sizeof buf, "%.17g", *v);
        out << buf;
      } else {
        out << "NA";
      }
      out << '\n';
    }
  }
}

std::optional<double> compute_af(const PerformanceMatrix& p) {
  const std::size_t n = p.size();
  if (n < 2) return std::nullopt;
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const auto last = p.get(n - 1, j), diag = p.get(j, j);
    if (!last || !diag) return std::nullopt;
    sum += *last - *diag;
  }
  return sum / static_cast<double>(n - 1);
}

std::optional<double> compute_ap(const PerformanceMatrix& p) {
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const auto v = p.get(j, j);
    if (!v) return std::nullopt;
    sum += *v;
  }
  return sum / static_cast<double>(p.size());
}

std::optional<double> compute_avgperf(const PerformanceMatrix& p) {
  double sum = 0.0;
  for (const auto& v : p.row(p.size() - 1)) {
    if (!v) return std::nullopt;
    sum += *v;
  }
  return sum / static_cast<double>(p.size());
}

MetricsReport make_report(const PerformanceMatrix& p, std::string method, std::string target,
                          std::uint64_t seed, double cpu_seconds) {
  return MetricsReport{std::move(method), std::move(target), seed,          compute_af(p),
                       compute_ap(p),     compute_avgperf(p), cpu_seconds};
}

Stat mean_and_std(std::span<const double> values) {
  if (values.empty()) throw ConfigError("mean_and_std: no values");
  Stat s;
  s.count = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  return s;
}

TrialAggregate aggregate_trials(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw ConfigError("aggregate_trials: no reports");
  TrialAggregate agg{reports[0].method, reports[0].target, {}};
  for (const auto& r : reports)
    if (r.method != agg.method || r.target != agg.target)
      throw ConfigError("aggregate_trials: reports mix methods or targets");

  auto collect = [&](const char* name, auto field) {
    std::vector<double> vals;
    for (const auto& r : reports) {
      const std::optional<double> v = field(r);
      if (!v) {
        agg.metrics[name] = std::nullopt;
        return;
      }
      vals.push_back(*v);
    }
    agg.metrics[name] = mean_and_std(vals);
  };
  collect("AF", [](const MetricsReport& r) { return r.af; });
  collect("AP", [](const MetricsReport& r) { return r.ap; });
  collect("AvgPerf", [](const MetricsReport& r) { return r.avgperf; });
  collect("cpu_seconds", [](const MetricsReport& r) { return std::optional<double>(r.cpu_seconds); });
  return agg;
}

}  // namespace fedcl
