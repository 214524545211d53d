#include "fedcl/core/param_vector.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>

#include "fedcl/core/tensor.hpp"
#include "fedcl/errors.hpp"

namespace fedcl {

std::size_t Segment::size() const noexcept { return shape_product(shape); }

Layout::Layout(std::string name,
               const std::vector<std::pair<std::string, std::vector<std::size_t>>>& parts)
    : name_(std::move(name)) {
  segments_.reserve(parts.size());
  for (const auto& [seg_name, shape] : parts) {
    for (const auto& s : segments_) {
      if (s.name == seg_name) throw LayoutError("duplicate segment '" + seg_name + "'");
    }
    Segment s{seg_name, total_, shape};
    total_ += s.size();
    segments_.push_back(std::move(s));
  }
}

const Segment& Layout::segment(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw LayoutError("layout '" + name_ + "' has no segment '" + name + "'");
}

ParamVector::ParamVector(LayoutPtr layout) : layout_(std::move(layout)) {
  if (!layout_) throw LayoutError("null layout");
  data_.assign(layout_->total(), 0.0);
}

ParamVector::ParamVector(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), data_(std::move(values)) {
  if (!layout_) throw LayoutError("null layout");
  if (data_.size() != layout_->total()) {
    throw LayoutError("value count " + std::to_string(data_.size()) + " does not match layout '" +
                      layout_->name() + "' of size " + std::to_string(layout_->total()));
  }
}

const Layout& ParamVector::layout() const {
  if (!layout_) throw LayoutError("parameter vector has no layout");
  return *layout_;
}

bool ParamVector::same_layout(const ParamVector& other) const noexcept {
  if (layout_ == other.layout_) return true;
  if (!layout_ || !other.layout_) return false;
  return *layout_ == *other.layout_;
}

void ParamVector::require_same_layout(const ParamVector& other, const char* context) const {
  if (!same_layout(other)) {
    throw LayoutError(std::string(context) + ": parameter layouts differ");
  }
}

std::span<double> ParamVector::segment(const std::string& name) {
  const Segment& s = layout().segment(name);
  return std::span<double>(data_).subspan(s.offset, s.size());
}

std::span<const double> ParamVector::segment(const std::string& name) const {
  const Segment& s = layout().segment(name);
  return std::span<const double>(data_).subspan(s.offset, s.size());
}

ParamVector& ParamVector::operator+=(const ParamVector& other) {
  require_same_layout(other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& other) {
  require_same_layout(other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ParamVector& ParamVector::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

ParamVector& ParamVector::axpy(double a, const ParamVector& x) {
  require_same_layout(x, "axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
  return *this;
}

void ParamVector::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

bool ParamVector::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool operator==(const ParamVector& a, const ParamVector& b) {
  if (!a.same_layout(b)) return false;
  return a.data_.size() == b.data_.size() &&
         (a.data_.empty() ||
          std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(double)) == 0);
}

ParamVector operator+(ParamVector a, const ParamVector& b) { return a += b; }
ParamVector operator-(ParamVector a, const ParamVector& b) { return a -= b; }
ParamVector operator*(double s, ParamVector a) { return a *= s; }

std::uint64_t fingerprint(const ParamVector& p) noexcept {
  // FNV-1a over the value bytes.
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : p.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace fedcl
