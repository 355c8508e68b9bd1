#pragma once

// Open box domains, their exhaustions, moving integration regions and the
// weight function tau.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "volterra/expr.hpp"
#include "volterra/grid.hpp"

namespace volterra {

struct Tolerances {
  double geom = 1e-9;
  double strict = 1e-12;
};

/// Variables x1..xN (plus "x" and "t" when N = 1).
Scope point_scope(std::size_t dim);

/// Variables x1..xN followed by y1..yN (plus x, t, y, s when N = 1).
Scope pair_scope(std::size_t dim);

/// Coordinate box; a side with lower >= upper makes the box empty.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }
  bool empty() const;
  double measure() const;
  Box intersect(const Box& other) const;
  bool contains(const Box& inner, double tol) const;
  bool contains_point(std::span<const double> x, double tol) const;
  /// Largest Euclidean norm over the closed box.
  double sup_norm() const;
};

/// Lebesgue measure of A \triangle B, computed as l(A) + l(B) - 2 l(A n B).
double symmetric_difference_measure(const Box& a, const Box& b);

/// The moving region x -> prod_i (lower_i(x), upper_i(x)), clipped to Omega.
class Region {
 public:
  Region() = default;
  Region(std::vector<Expr> lower, std::vector<Expr> upper, Box omega);

  std::size_t dim() const { return lower_src_.size(); }
  const Box& omega() const { return omega_; }
  const std::vector<Expr>& lower_exprs() const { return lower_src_; }
  const std::vector<Expr>& upper_exprs() const { return upper_src_; }

  Box raw(std::span<const double> x) const;
  Box at(std::span<const double> x) const;

 private:
  std::vector<Expr> lower_src_;
  std::vector<Expr> upper_src_;
  std::vector<CompiledExpr> lower_;
  std::vector<CompiledExpr> upper_;
  Box omega_;
};

double region_measure(const Region& r, std::span<const double> x);
double rho(const Region& r, std::span<const double> x, std::span<const double> x2);

/// Increasing family of bounded boxes Omega_n, given per axis by expressions in n.
class Exhaustion {
 public:
  Exhaustion() = default;
  Exhaustion(std::vector<Expr> lower, std::vector<Expr> upper, Box omega);

  /// (R^N \ D(dOmega, 1/n)) n [-n, n]^N n Omega.
  static Exhaustion standard(const Box& omega);

  std::size_t dim() const { return lower_.size(); }
  Box member(int n) const;
  /// First n <= n_max whose member does not contain its predecessor, if any.
  std::optional<int> first_nesting_violation(int n_max) const;
  std::optional<int> first_covering(const Box& probe, int n_max) const;

 private:
  std::vector<CompiledExpr> lower_;
  std::vector<CompiledExpr> upper_;
  Box omega_;
};

class TauMap {
 public:
  TauMap() = default;
  TauMap(Expr expr, std::size_t dim);

  double operator()(std::span<const double> x) const { return compiled_(x); }
  const Expr& expr() const { return expr_; }

 private:
  Expr expr_;
  CompiledExpr compiled_;
};

struct Domain {
  Box omega;
  Exhaustion exhaustion;
  Region region;
  TauMap tau;

  std::size_t dim() const { return omega.dim(); }
  /// Grid over the closure of Omega_n with step at most h.
  GridDesc grid(int n, double h) const;
};

struct InvarianceReport {
  bool pass = true;
  std::size_t checked = 0;
  double worst_excess = 0.0;
  std::vector<double> worst_point;
};

/// Checks Lambda(x) c closure(Omega_n) for every node x of `samples`.
InvarianceReport check_lambda_invariance(const Exhaustion& e, const Region& r, int n,
                                         const GridDesc& samples, Tolerances tol = {});

struct TauProbe {
  std::vector<double> x0;
  double delta = 0.0;
};

struct TauProbeResult {
  TauProbe probe;
  bool pass = false;
  double tau_x0 = 0.0;
  double best_sup = 0.0;
  std::vector<double> witness;
};

struct AdmissibilityReport {
  bool pass = true;
  std::vector<TauProbeResult> probes;
};

/// For each probe, searches B(x0, delta) n Omega for a point x with
/// sup tau(Lambda(x) n Lambda(x0)) < tau(x0) - tol.strict.
AdmissibilityReport check_tau_admissible(const TauMap& tau, const Region& r,
                                         std::span<const TauProbe> probes, Tolerances tol = {});

/// Nodes of a coarse interior lattice of Omega_n, for default admissibility probes.
std::vector<TauProbe> default_tau_probes(const Domain& domain, int n, double h);

}  // namespace volterra
