#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "fedcl/errors.hpp"
#include "fedcl/eval/cpu_timer.hpp"
#include "fedcl/eval/evaluate.hpp"
#include "fedcl/eval/metrics.hpp"
#include "support.hpp"

using namespace fedcl;

namespace {

PerformanceMatrix matrix(std::vector<std::vector<double>> rows) {
  PerformanceMatrix p(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) p.set(i, j, rows[i][j]);
  return p;
}

}  // namespace

TEST_CASE("rmse examples") {
  Tensor a({2, 2}, {1, 2, 3, 4});
  CHECK(rmse(a, a) == 0.0);
  Tensor c({2, 2}, {1.5, 2.5, 3.5, 4.5});
  CHECK(rmse(a, c) == 0.5);
  CHECK(rmse(Tensor({1, 2}, {0, 0}), Tensor({1, 2}, {3, 4})) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK_THROWS_AS(rmse(Tensor({0, 2}), Tensor({0, 2})), ShapeError);
  CHECK_THROWS_AS(rmse(a, Tensor({4, 1}, {1, 2, 3, 4})), ShapeError);
}

TEST_CASE("metric examples") {
  PerformanceMatrix p = matrix({{1, 0, 0}, {0, 1, 0}, {2, 2, 1}});
  CHECK(*compute_af(p) == 1.0);
  CHECK(*compute_ap(p) == 1.0);
  CHECK(*compute_avgperf(p) == doctest::Approx(5.0 / 3.0));

  PerformanceMatrix flat = matrix({{1, 5}, {1, 3}});
  CHECK(*compute_af(flat) == 0.0);
  CHECK(*compute_ap(flat) == 2.0);
  CHECK(*compute_avgperf(flat) == 2.0);
  PerformanceMatrix better = matrix({{2, 5}, {1, 3}});
  CHECK(*compute_af(better) < 0.0);
  CHECK(*compute_avgperf(matrix({{9, 9}, {2, 4}})) == 3.0);

  PerformanceMatrix one(1);
  one.set(0, 0, 0.7);
  CHECK_FALSE(compute_af(one).has_value());
  CHECK(*compute_ap(one) == 0.7);
}

TEST_CASE("missing entries make dependent metrics null") {
  PerformanceMatrix p = matrix({{1, 2}, {3, 4}});
  p.set(0, 0, std::nullopt);
  CHECK_FALSE(compute_af(p).has_value());
  CHECK_FALSE(compute_ap(p).has_value());
  CHECK(compute_avgperf(p).has_value());
  p.set(0, 0, 1.0);
  p.set(0, 1, std::nullopt);  // upper triangle is not consumed
  CHECK(compute_af(p).has_value());
  CHECK_THROWS_AS(p.set(0, 0, -1.0), NonFiniteError);
  CHECK_THROWS_AS(p.set(0, 0, std::nan("")), NonFiniteError);
}

TEST_CASE("metrics agree with direct recomputation and scale linearly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 2);
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (auto& r : rows)
      for (double& v : r) v = u(rng);
    PerformanceMatrix p = matrix(rows);
    double ap = 0, avg = 0, af = 0;
    for (std::size_t j = 0; j < n; ++j) {
      ap += rows[j][j] / n;
      avg += rows[n - 1][j] / n;
      if (j + 1 < n) af += (rows[n - 1][j] - rows[j][j]) / (n - 1);
    }
    CHECK(*compute_ap(p) == doctest::Approx(ap).epsilon(1e-12));
    CHECK(*compute_avgperf(p) == doctest::Approx(avg).epsilon(1e-12));
    if (n > 1) CHECK(*compute_af(p) == doctest::Approx(af).epsilon(1e-12));
    PerformanceMatrix k = p.scaled(1e3);
    CHECK(*compute_ap(k) == doctest::Approx(1e3 * *compute_ap(p)).epsilon(1e-12));
    if (n > 1) CHECK(*compute_af(k) == doctest::Approx(1e3 * *compute_af(p)).epsilon(1e-12));
  }
}

TEST_CASE("performance matrix csv") {
  PerformanceMatrix p(2);
  p.set(0, 0, 0.5);
  p.set(1, 0, 0.25);
  p.set(1, 1, 1.0);
  std::ostringstream out;
  p.write_csv(out);
  CHECK(out.str() == "model_after_task,test_task,rmse\n1,1,0.5\n1,2,NA\n2,1,0.25\n2,2,1\n");
}

TEST_CASE("trial aggregation") {
  std::vector<MetricsReport> reps(2);
  for (auto& r : reps) {
    r.method = "Naive";
    r.target = "TEMP";
  }
  reps[0].af = 1;
  reps[1].af = 3;
  reps[0].ap = reps[1].ap = 5;
  reps[0].avgperf = 2;
  TrialAggregate a = aggregate_trials(reps);
  CHECK(a.metrics["AF"]->mean == 2.0);
  CHECK(a.metrics["AF"]->std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(a.metrics["AP"]->std == 0.0);
  CHECK_FALSE(a.metrics["AvgPerf"].has_value());
  TrialAggregate single = aggregate_trials(std::span(reps).first(1));
  CHECK(single.metrics["AF"]->std == 0.0);
  CHECK(single.metrics["AF"]->count == 1);
  reps[1].method = "SI";
  CHECK_THROWS_AS(aggregate_trials(reps), ConfigError);
}

TEST_CASE("cpu timer") {
  CpuTimer idle;
  CHECK(idle.elapsed() >= 0.0);
  CHECK(idle.elapsed() < 0.01);
  CpuTimer outer;
  volatile double sink = 0;
  CpuTimer first;
  for (int i = 0; i < 3'000'000; ++i) sink = sink + std::sqrt(static_cast<double>(i));
  const double a = first.elapsed();
  CpuTimer second;
  for (int i = 0; i < 3'000'000; ++i) sink = sink + std::sqrt(static_cast<double>(i));
  const double b = second.elapsed();
  const double total = outer.elapsed();
  CHECK(total >= a);
  CHECK(total >= b);
}

TEST_CASE("pooled rmse matches the rmse of concatenated predictions") {
  LstmSpec spec;
  spec.input_dim = 2;
  spec.hidden_dim = 4;
  spec.lag = 3;
  spec.horizon = 2;
  ParamVector theta = testsupport::random_params(spec, 1);
  WindowedDataset a, b, none;
  a.x = testsupport::random_tensor({5, 3, 2}, 2);
  a.y = testsupport::random_tensor({5, 2}, 3);
  b.x = testsupport::random_tensor({3, 3, 2}, 4);
  b.y = testsupport::random_tensor({3, 2}, 5);
  none.x = Tensor({0, 3, 2});
  none.y = Tensor({0, 2});
  std::vector<double> xs(a.x.data().begin(), a.x.data().end()), ys(a.y.data().begin(), a.y.data().end());
  xs.insert(xs.end(), b.x.data().begin(), b.x.data().end());
  ys.insert(ys.end(), b.y.data().begin(), b.y.data().end());
  const Tensor all_x({8, 3, 2}, xs), all_y({8, 2}, ys);
  const double direct = rmse(lstm_forward(spec, theta, all_x), all_y);
  const std::vector<const WindowedDataset*> parts{&a, &none, &b};
  CHECK(*pooled_rmse(spec, theta, parts) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(*pooled_rmse(spec, theta, parts, Exec::serial) == *pooled_rmse(spec, theta, parts, Exec::parallel));
  const std::vector<const WindowedDataset*> empty{&none};
  CHECK_FALSE(pooled_rmse(spec, theta, empty).has_value());
}
