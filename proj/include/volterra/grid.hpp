#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace volterra {

/// Tensor grid over a closed box. Nodes along each axis are equally spaced and
/// include both end points; flat indices run lexicographically with the last
/// axis fastest.
class GridDesc {
 public:
  GridDesc() = default;
  GridDesc(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> count);

  /// Grid over [lower, upper] with a step no larger than `h` on every axis.
  static GridDesc with_step(const std::vector<double>& lower, const std::vector<double>& upper,
                            double h);

  std::size_t dim() const { return count_.size(); }
  std::size_t size() const { return size_; }
  std::size_t count(std::size_t axis) const { return count_[axis]; }
  double lower(std::size_t axis) const { return lower_[axis]; }
  double upper(std::size_t axis) const { return upper_[axis]; }
  double step(std::size_t axis) const { return step_[axis]; }
  double max_step() const;
  std::size_t stride(std::size_t axis) const { return stride_[axis]; }

  double coord(std::size_t axis, std::size_t i) const {
    return i + 1 == count_[axis] ? upper_[axis] : lower_[axis] + static_cast<double>(i) * step_[axis];
  }

  void point(std::size_t flat, std::span<double> x) const;
  std::size_t index_along(std::size_t flat, std::size_t axis) const {
    return (flat / stride_[axis]) % count_[axis];
  }

  bool operator==(const GridDesc& other) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> step_;
  std::vector<std::size_t> count_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

/// Values of u: grid -> R^M, stored node-major.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(GridDesc grid, std::size_t components, double fill = 0.0)
      : grid_(std::move(grid)), components_(components), values_(grid_.size() * components, fill) {}

  const GridDesc& grid() const { return grid_; }
  std::size_t components() const { return components_; }
  std::size_t size() const { return grid_.size(); }

  double& at(std::size_t node, std::size_t c = 0) { return values_[node * components_ + c]; }
  double at(std::size_t node, std::size_t c = 0) const { return values_[node * components_ + c]; }

  std::span<double> value(std::size_t node) { return {values_.data() + node * components_, components_}; }
  std::span<const double> value(std::size_t node) const {
    return {values_.data() + node * components_, components_};
  }

  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  /// Euclidean norm of the value at a node.
  double magnitude(std::size_t node) const;

  /// Throws GridMismatch unless both functions share grid and component count.
  void require_compatible(const GridFunction& other) const;

  GridFunction operator-(const GridFunction& other) const;

 private:
  GridDesc grid_;
  std::size_t components_ = 0;
  std::vector<double> values_;
};

}  // namespace volterra
