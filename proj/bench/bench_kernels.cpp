// Serial vs OpenMP timings for the hot kernels.
//   fedcl_bench [--reps N] [--batch B] [--hidden H]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "fedcl/cl/kmeans.hpp"
#include "fedcl/core/loss.hpp"
#include "fedcl/core/lstm.hpp"
#include "fedcl/eval/evaluate.hpp"

using namespace fedcl;

namespace {

Tensor uniform(std::vector<std::size_t> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : t.data()) v = u(rng);
  return t;
}

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const std::string& name, int reps, const std::function<void(Exec)>& fn) {
  const double s = best_of(reps, [&] { fn(Exec::serial); });
  const double p = best_of(reps, [&] { fn(Exec::parallel); });
  std::printf("%-22s %10.3f ms %10.3f ms %7.2fx\n", name.c_str(), s * 1e3, p * 1e3, s / p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedcl kernel benchmark"};
  int reps = 5;
  std::size_t batch = 256;
  std::size_t hidden = 64;
  app.add_option("--reps", reps)->check(CLI::PositiveNumber);
  app.add_option("--batch", batch)->check(CLI::PositiveNumber);
  app.add_option("--hidden", hidden)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const LstmSpec spec{.input_dim = 17, .hidden_dim = hidden, .num_layers = 1, .horizon = 6, .lag = 12};
  const ParamVector theta = init_params(spec, 1);
  const Tensor x = uniform({batch, spec.lag, spec.input_dim}, 2);
  const Tensor y = uniform({batch, spec.horizon}, 3);
  WindowedDataset eval_set{.x = uniform({8 * batch, spec.lag, spec.input_dim}, 4),
                           .y = uniform({8 * batch, spec.horizon}, 5)};
  const Tensor points = uniform({4000, spec.lag * spec.input_dim}, 6);

  std::printf("threads %d, batch %zu, hidden %zu, %zu parameters\n", omp_get_max_threads(), batch, hidden,
              theta.size());
  std::printf("%-22s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");
  row("forward", reps, [&](Exec e) { lstm_forward(spec, theta, x, e); });
  row("loss+gradient", reps, [&](Exec e) { loss_and_grad(spec, theta, x, y, {}, e); });
  row("evaluate (8 batches)", reps, [&](Exec e) { squared_error(spec, theta, eval_set, e); });
  row("kmeans k=600", std::max(1, reps / 2), [&](Exec e) { kmeans(points, 600, 7, {}, e); });
  return 0;
}
