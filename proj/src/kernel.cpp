#include "volterra/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "volterra/domain.hpp"
#include "volterra/error.hpp"

namespace volterra {

Kernel::Kernel(std::vector<Expr> entries, std::size_t dim, std::size_t components)
    : entries_(std::move(entries)), dim_(dim), components_(components) {
  if (entries_.size() != components_ * components_) {
    throw Error("kernel needs " + std::to_string(components_ * components_) + " entries, got " +
                std::to_string(entries_.size()));
  }
  const Scope scope = pair_scope(dim_);
  bool uses_x = false;
  bool uses_y = false;
  for (const Expr& e : entries_) {
    compiled_.emplace_back(e, scope);
    for (std::size_t i = 0; i < dim_; ++i) {
      uses_x = uses_x || compiled_.back().uses_slot(i);
      uses_y = uses_y || compiled_.back().uses_slot(dim_ + i);
    }
  }
  if (uses_x && uses_y) {
    dependence_ = Dependence::general;
  } else if (uses_x) {
    dependence_ = Dependence::x_only;
  } else if (uses_y) {
    dependence_ = Dependence::y_only;
  } else {
    dependence_ = Dependence::constant;
  }
}

void Kernel::eval(std::span<const double> xy, std::span<double> out) const {
  for (std::size_t i = 0; i < compiled_.size(); ++i) {
    const double v = compiled_[i](xy);
    if (!std::isfinite(v)) {
      std::string where;
      for (std::size_t j = 0; j < xy.size(); ++j) where += (j ? ", " : "") + format_shortest(xy[j]);
      throw KernelEval("kernel entry " + std::to_string(i) + " is not finite at (" + where + ")");
    }
    out[i] = v;
  }
}

double Kernel::norm(std::span<const double> xy) const {
  std::vector<double> k(components_ * components_);
  eval(xy, k);
  return matrix_norm(k, components_);
}

double matrix_norm(std::span<const double> k, std::size_t m) {
  if (m == 1) return std::fabs(k[0]);
  std::vector<double> v(m);
  std::vector<double> kv(m);
  std::vector<double> next(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
  double lambda = 0.0;
  for (int step = 0; step < 50; ++step) {
    double len = 0.0;
    for (double c : v) len += c * c;
    len = std::sqrt(len);
    if (len == 0.0) return 0.0;
    for (double& c : v) c /= len;
    for (std::size_t r = 0; r < m; ++r) {
      kv[r] = 0.0;
      for (std::size_t c = 0; c < m; ++c) kv[r] += k[r * m + c] * v[c];
    }
    for (std::size_t c = 0; c < m; ++c) {
      next[c] = 0.0;
      for (std::size_t r = 0; r < m; ++r) next[c] += k[r * m + c] * kv[r];
    }
    lambda = 0.0;
    for (std::size_t c = 0; c < m; ++c) lambda += v[c] * next[c];
    v.swap(next);
  }
  return std::sqrt(std::max(0.0, lambda));
}

}  // namespace volterra
