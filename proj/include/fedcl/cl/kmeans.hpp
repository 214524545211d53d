#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedcl/core/lstm.hpp"
#include "fedcl/core/tensor.hpp"

namespace fedcl {

struct KMeansOptions {
  std::size_t max_iterations = 100;
  /// Stop once no centroid moves farther than this (Euclidean).
  double tolerance = 1e-6;
};

struct KMeansResult {
  Tensor centroids;                     // [k, D]
  std::vector<std::size_t> assignment;  // cluster of each point
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Points are the rows of `points`
/// flattened to D = size / dim(0). Distance ties go to the lowest cluster index;
/// an empty cluster keeps its previous centroid.
KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {}, Exec exec = Exec::parallel);

/// For every nonempty cluster, the member closest to its centroid
/// (ties -> lowest index). Returned in ascending index order.
std::vector<std::size_t> nearest_members(const Tensor& points, const KMeansResult& clusters);

/// max(1, round(ratio * m)), capped at m.
std::size_t exemplar_count(double ratio, std::size_t m);

}  // namespace fedcl
