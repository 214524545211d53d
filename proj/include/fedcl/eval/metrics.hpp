#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedcl/core/tensor.hpp"

namespace fedcl {

/// sqrt of the mean squared error over every element. Shapes must match; empty is an error.
double rmse(const Tensor& pred, const Tensor& target);

/// P[i][j]: error of the model trained through task i on task j's test split.
/// Indices are 0-based here (task 1 is index 0); entries may be missing.
class PerformanceMatrix {
 public:
  explicit PerformanceMatrix(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void set(std::size_t i, std::size_t j, std::optional<double> value);
  std::optional<double> get(std::size_t i, std::size_t j) const;
  std::span<const std::optional<double>> row(std::size_t i) const;
  PerformanceMatrix scaled(double factor) const;

  /// "model_after_task,test_task,rmse" with 1-based task numbers; missing entries print as NA.
  void write_csv(std::ostream& out) const;

  friend bool operator==(const PerformanceMatrix&, const PerformanceMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::optional<double>> cells_;
};

/// mean over j < N-1 of (P[N-1][j] - P[j][j]); null for N = 1 or a missing entry.
std::optional<double> compute_af(const PerformanceMatrix& p);
/// mean of the diagonal.
std::optional<double> compute_ap(const PerformanceMatrix& p);
/// mean of the final row.
std::optional<double> compute_avgperf(const PerformanceMatrix& p);

struct MetricsReport {
  std::string method;
  std::string target;
  std::uint64_t seed = 0;
  std::optional<double> af;
  std::optional<double> ap;
  std::optional<double> avgperf;
  double cpu_seconds = 0.0;
};

MetricsReport make_report(const PerformanceMatrix& p, std::string method, std::string target,
                          std::uint64_t seed, double cpu_seconds);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) deviation; 0 for one trial
  std::size_t count = 0;
};

/// Per metric ("AF", "AP", "AvgPerf", "cpu_seconds"); a metric that is null in any trial is null.
struct TrialAggregate {
  std::string method;
  std::string target;
  std::map<std::string, std::optional<Stat>> metrics;
};

Stat mean_and_std(std::span<const double> values);
TrialAggregate aggregate_trials(std::span<const MetricsReport> reports);

}  // namespace fedcl
