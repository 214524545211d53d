#include "fedcl/core/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "fedcl/errors.hpp"

namespace fedcl {

std::size_t shape_product(const std::vector<std::size_t>& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape product " + std::to_string(shape_product(shape_)));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ShapeError("axis out of range");
  return shape_[axis];
}

std::size_t Tensor::row_size() const noexcept {
  if (shape_.empty() || shape_[0] == 0) return 0;
  return data_.size() / shape_[0];
}

std::span<double> Tensor::row(std::size_t i) {
  const std::size_t w = row_size();
  return std::span<double>(data_).subspan(i * w, w);
}

std::span<const double> Tensor::row(std::size_t i) const {
  const std::size_t w = row_size();
  return std::span<const double>(data_).subspan(i * w, w);
}

double& Tensor::at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

bool Tensor::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
  std::vector<std::size_t> shape = shape_;
  if (shape.empty()) throw ShapeError("cannot gather rows of a scalar tensor");
  shape[0] = indices.size();
  Tensor out(shape);
  const std::size_t w = row_size();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= shape_[0]) throw ShapeError("row index out of range");
    auto src = row(indices[k]);
    std::copy(src.begin(), src.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(k * w));
  }
  return out;
}

void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) throw ShapeError(std::string(what) + " contains non-finite values");
}

}  // namespace fedcl
