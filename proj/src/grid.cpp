#include "volterra/grid.hpp"

#include <algorithm>
#include <cmath>

#include "volterra/error.hpp"

namespace volterra {

GridDesc::GridDesc(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> count)
    : lower_(std::move(lower)), upper_(std::move(upper)), count_(std::move(count)) {
  if (lower_.size() != count_.size() || upper_.size() != count_.size()) {
    throw GridMismatch("grid bounds and counts differ in dimension");
  }
  const std::size_t n = count_.size();
  step_.assign(n, 0.0);
  stride_.assign(n, 1);
  for (std::size_t d = 0; d < n; ++d) {
    if (count_[d] == 0) throw GridMismatch("grid axis with no nodes");
    step_[d] = count_[d] > 1 ? (upper_[d] - lower_[d]) / static_cast<double>(count_[d] - 1) : 0.0;
  }
  for (std::size_t d = n; d-- > 1;) stride_[d - 1] = stride_[d] * count_[d];
  size_ = n == 0 ? 0 : stride_[0] * count_[0];
}

GridDesc GridDesc::with_step(const std::vector<double>& lower, const std::vector<double>& upper, double h) {
  std::vector<std::size_t> count(lower.size());
  for (std::size_t d = 0; d < lower.size(); ++d) {
    const double len = upper[d] - lower[d];
    if (!(len > 0.0)) {
      count[d] = 1;
      continue;
    }
    const double cells = std::ceil(len / h - 1e-9);
    count[d] = static_cast<std::size_t>(std::max(1.0, cells)) + 1;
  }
  return GridDesc(lower, upper, std::move(count));
}

double GridDesc::max_step() const {
  double m = 0.0;
  for (double s : step_) m = std::max(m, s);
  return m;
}

void GridDesc::point(std::size_t flat, std::span<double> x) const {
  for (std::size_t d = 0; d < dim(); ++d) x[d] = coord(d, index_along(flat, d));
}

bool GridDesc::operator==(const GridDesc& other) const {
  return lower_ == other.lower_ && upper_ == other.upper_ && count_ == other.count_;
}

double GridFunction::magnitude(std::size_t node) const {
  if (components_ == 1) return std::fabs(at(node));
  double s = 0.0;
  for (double v : value(node)) s += v * v;
  return std::sqrt(s);
}

void GridFunction::require_compatible(const GridFunction& other) const {
  if (!(grid_ == other.grid_) || components_ != other.components_) {
    throw GridMismatch("grid functions live on different grids");
  }
}

GridFunction GridFunction::operator-(const GridFunction& other) const {
  require_compatible(other);
  GridFunction out(grid_, components_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = values_[i] - other.values_[i];
  return out;
}

}  // namespace volterra
