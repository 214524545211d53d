#include "fedcl/cl/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fedcl/errors.hpp"

namespace fedcl {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

std::size_t nearest_centroid(const double* x, const Tensor& centroids, std::size_t d) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.dim(0); ++c) {
    const double dist = sq_dist(x, centroids.data().data() + c * d, d);
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return best;
}

void assign(const Tensor& points, const Tensor& centroids, std::size_t d,
            std::vector<std::size_t>& out, Exec exec) {
  const auto m = static_cast<std::ptrdiff_t>(out.size());
  const double* base = points.data().data();
  if (exec == Exec::serial) {
    for (std::ptrdiff_t i = 0; i < m; ++i) out[i] = nearest_centroid(base + i * d, centroids, d);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) out[i] = nearest_centroid(base + i * d, centroids, d);
}

Tensor plus_plus_seed(const Tensor& points, std::size_t m, std::size_t d, std::size_t k,
                      std::mt19937_64& rng) {
  Tensor centroids({k, d});
  const double* x = points.data().data();
  auto put = [&](std::size_t c, std::size_t idx) {
    std::copy_n(x + idx * d, d, centroids.data().data() + c * d);
  };
  put(0, std::uniform_int_distribution<std::size_t>(0, m - 1)(rng));

  std::vector<double> closest(m);
  for (std::size_t i = 0; i < m; ++i) closest[i] = sq_dist(x + i * d, centroids.data().data(), d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : closest) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      pick = m - 1;
      for (std::size_t i = 0; i < m; ++i) {
        acc += closest[i];
        if (acc > target && closest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);
    }
    put(c, pick);
    const double* cent = centroids.data().data() + c * d;
    for (std::size_t i = 0; i < m; ++i) closest[i] = std::min(closest[i], sq_dist(x + i * d, cent, d));
  }
  return centroids;
}

}  // namespace

std::size_t exemplar_count(double ratio, std::size_t m) {
  if (m == 0) return 0;
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(m)));
  return std::clamp<std::size_t>(k, 1, m);
}

KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options, Exec exec) {
  if (points.rank() == 0 || points.dim(0) == 0) throw ShapeError("kmeans: no points");
  const std::size_t m = points.dim(0);
  const std::size_t d = points.size() / m;
  if (k == 0 || k > m) throw ConfigError("kmeans: k must lie in [1, number of points]");
  require_finite(points, "kmeans input");

  std::mt19937_64 rng(seed);
  KMeansResult r;
  r.centroids = plus_plus_seed(points, m, d, k, rng);
  r.assignment.assign(m, 0);

  const double* x = points.data().data();
  std::vector<double> sums(k * d);
  std::vector<std::size_t> counts(k);
  for (r.iterations = 0; r.iterations < options.max_iterations;) {
    assign(points, r.centroids, d, r.assignment, exec);
    ++r.iterations;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t c = r.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += x[i * d + j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double moved = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double next = sums[c * d + j] / static_cast<double>(counts[c]);
        const double delta = next - r.centroids.data()[c * d + j];
        moved += delta * delta;
        r.centroids.data()[c * d + j] = next;
      }
      shift = std::max(shift, std::sqrt(moved));
    }
    if (shift <= options.tolerance) break;
  }
  // Membership consistent with the final centroids.
  assign(points, r.centroids, d, r.assignment, exec);
  return r;
}

std::vector<std::size_t> nearest_members(const Tensor& points, const KMeansResult& clusters) {
  const std::size_t m = points.dim(0);
  const std::size_t d = points.size() / m;
  const std::size_t k = clusters.centroids.dim(0);
  std::vector<std::size_t> best(k, m);
  std::vector<double> best_d(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t c = clusters.assignment[i];
    const double dist = sq_dist(points.data().data() + i * d, clusters.centroids.data().data() + c * d, d);
    if (dist < best_d[c]) {
      best_d[c] = dist;
      best[c] = i;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t idx : best)
    if (idx < m) out.push_back(idx);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fedcl
