#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedcl {

/// Dense row-major array of doubles with an explicit shape.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);
  /// Throws ShapeError when product(shape) != data.size().
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }

  /// Contiguous slice for index `i` along the leading axis.
  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;
  std::size_t row_size() const noexcept;

  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;

  bool all_finite() const noexcept;

  /// Gather rows (leading-axis slices) by index.
  Tensor gather_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape) noexcept;

/// Throws ShapeError if `t` contains NaN or Inf; `what` names the input.
void require_finite(const Tensor& t, const char* what);

}  // namespace fedcl
