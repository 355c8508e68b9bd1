#pragma once

// The Volterra operator, the Nemytskii selection of F, the outer map and the
// composite operator H, plus the sampled hypothesis checker.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "volterra/convex.hpp"
#include "volterra/grid.hpp"
#include "volterra/kernel.hpp"
#include "volterra/problem.hpp"
#include "volterra/sweep.hpp"

namespace volterra {

/// One quadrature of k(x, .) w(.) over Lambda(x) on the grid of w.
std::vector<double> volterra_apply(const Kernel& k, const Region& r, const GridFunction& w,
                                   std::span<const double> x, double tol = 1e-9);

/// Pointwise selection w(x) in F(x, u(x)). Throws InvalidMultimap where the envelopes cross.
GridFunction nemytskii_select(const MultiMapF& F, const GridFunction& u, Strategy strategy);

/// max over nodes x and quadrature nodes y of Lambda(x) of the operator norm of k(x, y).
double sup_kernel_norm(const Kernel& k, const Region& r, const GridDesc& grid, double tol = 1e-9);

/// Compiled form of H on a fixed grid.
class Operator {
 public:
  Operator(const ProblemSpec& spec, const GridDesc& grid);

  const GridDesc& grid() const { return grid_; }
  const ProblemSpec& spec() const { return spec_; }
  const Kernel& kernel() const { return kernel_; }
  std::size_t components() const { return spec_.components; }

  /// Lower and upper envelopes of F(x, u(x)) at every node.
  void envelopes(const GridFunction& u, GridFunction& lower, GridFunction& upper) const;
  GridFunction select(const GridFunction& u, Strategy s) const;
  GridFunction volterra(const GridFunction& w) const;
  GridFunction volterra_serial(const GridFunction& w) const;
  /// Outer map at every node, given u and the Volterra term v.
  GridFunction outer(const GridFunction& u, const GridFunction& v) const;

  GridFunction apply(const GridFunction& u) const { return apply(u, spec_.strategy); }
  GridFunction apply(const GridFunction& u, Strategy s) const;

  /// g(., 0), g(., 0, 0) or steiner(G(., 0)) by form.
  GridFunction initial() const;

  /// Pointwise pieces used by the residual and the condensing harness.
  void outer_at(std::span<const double> x, std::span<const double> u, std::span<const double> v,
                std::span<double> out) const;
  ConvexSet G_at(std::span<const double> x, std::span<const double> z) const;
  double b_at(std::span<const double> x) const { return b_(x); }
  double phi(double t) const;
  double vartheta(double t) const;
  double theta(double t) const;

 private:
  ProblemSpec spec_;
  GridDesc grid_;
  Kernel kernel_;
  VolterraPlan plan_;
  std::vector<CompiledExpr> f_lower_;
  std::vector<CompiledExpr> f_upper_;
  CompiledExpr b_;
  std::vector<CompiledExpr> g_;
  std::vector<CompiledExpr> G_lower_;
  std::vector<CompiledExpr> G_upper_;
  CompiledExpr phi_;
  CompiledExpr theta_;
  CompiledExpr vartheta_;
};

GridFunction H_apply(const ProblemSpec& spec, const GridFunction& u);

struct HypothesisItem {
  std::string name;
  bool pass = true;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string witness;
};

struct HypothesisReport {
  bool pass = true;
  std::vector<HypothesisItem> items;
};

/// Randomised sampled verification of the data hypotheses on Omega_n with
/// `samples` draws per item. The seed is fixed, so reports are reproducible.
HypothesisReport check_hypotheses(const ProblemSpec& spec, int n, std::size_t samples);

}  // namespace volterra
