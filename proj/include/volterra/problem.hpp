#pragma once

// Data of one inclusion instance, shared by the operators, the weights and the solver.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "volterra/domain.hpp"
#include "volterra/expr.hpp"

namespace volterra {

/// Problem forms:
///   single     u(x) in g(x, u(x)) + V(F(., u))(x)
///   composite  u(x) in g(x, u(x), V(F(., u))(x))
///   set_valued u(x) in G(x, V(F(., u))(x))
enum class Form { single = 13, composite = 21, set_valued = 24 };

enum class Strategy { midpoint, lower, upper };

std::optional<Strategy> strategy_from_name(std::string_view name);
std::string_view strategy_name(Strategy s);

/// F(x, u) = prod_i [lower_i(x, u), upper_i(x, u)].
struct MultiMapF {
  std::vector<Expr> lower;
  std::vector<Expr> upper;
  Expr b;
  Expr eta;

  std::size_t components() const { return lower.size(); }
  bool singleton() const;
};

struct OuterMap {
  Form form = Form::single;
  std::vector<Expr> g;
  std::vector<Expr> G_lower;
  std::vector<Expr> G_upper;
  Expr phi;
  std::optional<Expr> theta;
  std::optional<Expr> vartheta;
};

struct ProblemSpec {
  Domain domain;
  std::size_t components = 1;
  std::vector<Expr> kernel;
  MultiMapF F;
  OuterMap outer;
  int n = 1;
  double h = 1.0 / 64.0;
  double h_weights = 0.0;  // 0: same as h
  double tol_fix = 1e-10;
  int max_iter = 1000;
  Strategy strategy = Strategy::midpoint;
  std::optional<Expr> a_n;
  Tolerances tol;

  std::size_t dim() const { return domain.dim(); }
  double weight_step() const { return h_weights > 0.0 ? h_weights : h; }
  GridDesc grid() const { return domain.grid(n, h); }

  /// Throws Error when form-specific data are missing or mis-sized.
  void validate() const;
};

/// x-variables followed by u (M = 1) or u1..uM.
Scope value_scope(std::size_t dim, std::size_t components);

/// Scope of the outer map for a form: single uses value_scope; composite adds
/// u1 = u(x) and u2 = w = the integral; set_valued binds u (or u1..uM) to the integral.
Scope outer_scope(Form form, std::size_t dim, std::size_t components);

/// Scope of one-variable moduli phi, theta, vartheta: "x".
Scope modulus_scope();

}  // namespace volterra
