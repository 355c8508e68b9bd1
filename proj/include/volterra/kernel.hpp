#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "volterra/expr.hpp"

namespace volterra {

/// M x M matrix of expressions in (x1..xN, y1..yN), row-major.
class Kernel {
 public:
  enum class Dependence { constant, y_only, x_only, general };

  Kernel() = default;
  Kernel(std::vector<Expr> entries, std::size_t dim, std::size_t components);

  std::size_t dim() const { return dim_; }
  std::size_t components() const { return components_; }
  Dependence dependence() const { return dependence_; }
  const std::vector<Expr>& entries() const { return entries_; }

  /// `xy` holds x followed by y; writes M*M entries. Throws KernelEval on a
  /// non-finite entry.
  void eval(std::span<const double> xy, std::span<double> out) const;

  /// Operator norm of k(x, y): |k| for M = 1, else 50 power-iteration steps on k^T k.
  double norm(std::span<const double> xy) const;

 private:
  std::vector<Expr> entries_;
  std::vector<CompiledExpr> compiled_;
  std::size_t dim_ = 0;
  std::size_t components_ = 0;
  Dependence dependence_ = Dependence::constant;
};

/// Spectral norm of a row-major M x M matrix by power iteration on k^T k.
double matrix_norm(std::span<const double> k, std::size_t m);

}  // namespace volterra
