#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fedcl {

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::vector<std::size_t> shape;

  std::size_t size() const noexcept;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Ordered, contiguous, non-overlapping named segments covering [0, total).
class Layout {
 public:
  Layout(std::string name, const std::vector<std::pair<std::string, std::vector<std::size_t>>>& parts);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  std::size_t total() const noexcept { return total_; }
  const Segment& segment(const std::string& name) const;

  friend bool operator==(const Layout& a, const Layout& b) {
    return a.name_ == b.name_ && a.segments_ == b.segments_;
  }

 private:
  std::string name_;
  std::vector<Segment> segments_;
  std::size_t total_ = 0;
};

using LayoutPtr = std::shared_ptr<const Layout>;

/// Flat parameter vector tied to a layout. Arithmetic requires identical layouts.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(LayoutPtr layout);
  ParamVector(LayoutPtr layout, std::vector<double> values);

  const Layout& layout() const;
  const LayoutPtr& layout_ptr() const noexcept { return layout_; }
  bool same_layout(const ParamVector& other) const noexcept;
  /// Throws LayoutError unless layouts match; `context` names the caller.
  void require_same_layout(const ParamVector& other, const char* context) const;

  std::size_t size() const noexcept { return data_.size(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> segment(const std::string& name);
  std::span<const double> segment(const std::string& name) const;

  ParamVector& operator+=(const ParamVector& other);
  ParamVector& operator-=(const ParamVector& other);
  ParamVector& operator*=(double s) noexcept;
  /// this += a * x
  ParamVector& axpy(double a, const ParamVector& x);
  void fill(double v) noexcept;

  bool all_finite() const noexcept;

  /// Bitwise equality of layout and values.
  friend bool operator==(const ParamVector& a, const ParamVector& b);

 private:
  LayoutPtr layout_;
  std::vector<double> data_;
};

ParamVector operator+(ParamVector a, const ParamVector& b);
ParamVector operator-(ParamVector a, const ParamVector& b);
ParamVector operator*(double s, ParamVector a);

/// Stable 64-bit fingerprint of the raw bytes; used to compare trajectories.
std::uint64_t fingerprint(const ParamVector& p) noexcept;

}  // namespace fedcl
