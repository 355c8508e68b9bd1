#pragma once

// Picard iteration for the selected equation, residuals of the inclusion and
// the discrete measure-of-nonequicontinuity harness.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/operators.hpp"
#include "volterra/problem.hpp"
#include "volterra/weights.hpp"

namespace volterra {

struct SolveReport {
  GridFunction solution;
  int iterations = 0;
  bool converged = false;
  std::vector<double> deltas;      // |u_{k+1} - u_k| in the L_n weighted norm
  std::vector<double> sup_deltas;  // the same differences in the sup norm
  double residual = 0.0;
  double ratio = 0.0;  // median of deltas[k+1] / deltas[k]
  double quadrature_tolerance = 0.0;
  ScheduleRow schedule;
};

/// u_0 from the outer map at zero, then u_{k+1} = H(u_k) until the sup-norm
/// step drops below tol_fix. Throws NonContractive when the median of the last
/// ten weighted step ratios is >= 1.
SolveReport picard_solve(const ProblemSpec& spec, const WeightSchedule& sched);

/// Grid max of the distance from u(x) to the admissible values at x. For
/// single-valued data and forms 13/21 this is |u - H(u)|.
double residual(const ProblemSpec& spec, const GridFunction& u);
double residual(const Operator& op, const GridFunction& u);

/// Members share one grid; operations throw GridMismatch otherwise.
struct FunctionFamily {
  std::vector<GridFunction> members;
};

/// max over members and node pairs one step apart along an axis of |f(x) - f(y)|.
double equicontinuity_modulus(const FunctionFamily& fam);

struct CondensingReport {
  double eps_in = 0.0;
  double eps_out = 0.0;
  double phi_eps_in = 0.0;
  double slack = 0.0;
  double C_slack = 0.0;  // slack / h
  bool within_invariant_set = true;
  bool pass = false;
};

/// Discrete form of e_n(H(M)) <= phi(e_n(M)). The slack bounds the change of
/// the outer map in x and of the Volterra term between neighbouring nodes,
/// from the kernel size, its variation in x, the growth bound b(1+|u|) and rho.
CondensingReport condensing_check(const ProblemSpec& spec, const WeightSchedule& sched, const FunctionFamily& fam);

struct CertificateResult {
  std::vector<double> values;
  bool certified = false;
};

/// values_n = k_n y_n - x_n; certified iff all are >= 0 and one is > 0.
CertificateResult condensing_certificate(std::span<const double> xs, std::span<const double> ys,
                                         std::span<const double> ks);

struct MncAxiomReport {
  double e_family = 0.0;
  double e_adjoined = 0.0;
  double lipschitz_extra = 0.0;
  double step = 0.0;
  double worst_combination = 0.0;
  bool adjoin_ok = false;
  bool monotone_ok = false;
  bool convex_ok = false;
  bool pass = false;
};

/// Checks on the discrete modulus: adjoining an l-Lipschitz member raises it by
/// at most l h, never lowers it, and convex combinations of member pairs stay below it.
MncAxiomReport mnc_axiom_check(const FunctionFamily& fam, const GridFunction& extra);

}  // namespace volterra
