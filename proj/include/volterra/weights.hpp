#pragma once

// The weight functional Phi, selection of the exponential weights L_n and
// hat L_n, Bielecki norms and the boundary condition on a_n.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "volterra/domain.hpp"
#include "volterra/expr.hpp"
#include "volterra/grid.hpp"
#include "volterra/problem.hpp"
#include "volterra/sweep.hpp"

namespace volterra {

/// Phi(L, zeta)_n = max over nodes x of e^{-L tau(x)} int_{Lambda(x)} e^{L tau(y)} zeta(y) dy.
class PhiEvaluator {
 public:
  PhiEvaluator(const Domain& d, const GridDesc& grid, const Expr& zeta, double tol = 1e-9);

  double operator()(double L) const { return phi_sweep(tables_, L); }
  double serial(double L) const { return phi_sweep_serial(tables_, L); }
  const PhiTables& tables() const { return tables_; }

 private:
  PhiTables tables_;
};

double phi(double L, const Expr& zeta, int n, const Domain& d, double h);

/// Smallest ladder value 1, 2, 4, ..., 2^20 with phi(L) <= target, refined by 20
/// bisection steps below it; the returned L always satisfies phi(L) <= target.
/// Throws WeightSelectionFailed if 2^20 is not enough.
double select_L(double target, const PhiEvaluator& phi);
double select_L(double target, const Expr& zeta, int n, const Domain& d, double h);

struct BoundaryConditionReport {
  std::vector<double> d;  // d[n-1] = a_n - phi(a_n) - g_norm_n
  int window_lo = 1;
  int window_hi = 1;
  double window_min = 0.0;
  double slope = 0.0;
  bool nondecreasing = false;
  bool pass = false;
  std::string message;
};

/// Finite-window verdict on liminf (a_n - phi(a_n) - |g(., 0)|_n) > 0. Inputs
/// are indexed by n - 1; the window is [max(1, n_max / 2), n_max].
BoundaryConditionReport check_boundary_condition(std::span<const double> g_norm, const Expr& phi_fun, std::span<const double> a, int n_max);

struct ScheduleRow {
  int n = 0;
  double L = 0.0;
  double Lhat = 0.0;
  double a = 0.0;
  double k = 0.0;
  double r = 0.0;
  double phi_b = 0.0;
  double phi_eta = 0.0;
  double sup_tau = 0.0;
  double sup_K = 0.0;
  double margin = 0.0;   // boundary term d_n
  double k_upper = 1.0;  // psi_n(x) < x on (0, r_n] for every k_n below this
};

struct WeightSchedule {
  int N = 1;
  std::vector<ScheduleRow> rows;  // n = N .. n_max

  bool has(int n) const;
  const ScheduleRow& at(int n) const;
};

/// Offsets c_n in the boundary condition: sup |g(., 0)|, sup |g(., 0, 0)| or
/// sup ||G(., 0)||^+ over the nodes of Omega_n, for n = 1 .. n_max.
std::vector<double> boundary_offsets(const ProblemSpec& spec, int n_max);

/// a_n from the config, or c n with c the smallest of 1, 2, 4, ... making every
/// boundary term up to n_max positive.
std::vector<double> default_a_sequence(const ProblemSpec& spec, int n_max);

WeightSchedule build_schedule(const ProblemSpec& spec, std::span<const double> a, int n_max);
WeightSchedule build_schedule(const ProblemSpec& spec, int n_max);

double bielecki_norm(const GridFunction& u, double L, const TauMap& tau);
double sup_norm(const GridFunction& u);

double psi(int n, double x, const WeightSchedule& sched, const Expr& phi_fun);

/// Columns n, L_n, Lhat_n, a_n, k_n, r_n, phi_b, phi_eta.
void write_schedule_csv(std::ostream& out, const WeightSchedule& s);
WeightSchedule read_schedule_csv(std::istream& in);

}  // namespace volterra
