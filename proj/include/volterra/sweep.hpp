#pragma once

// Grid-wide sweeps behind the Volterra operator and the weight functional.
// Each has an OpenMP version used by the solver and a plain serial reference
// that recomputes everything per node; tests and the benchmark compare them.

#include <cstddef>
#include <vector>

#include "volterra/domain.hpp"
#include "volterra/grid.hpp"
#include "volterra/kernel.hpp"
#include "volterra/quadrature.hpp"

namespace volterra {

/// Quadrature weights of Lambda(x) for every node x of a grid.
struct VolterraPlan {
  GridDesc grid;
  std::vector<BoxWeights> boxes;
};

VolterraPlan make_volterra_plan(const Region& r, const GridDesc& grid, double tol);

/// V(w)(x) = sum over y of W_x(y) k(x, y) w(y) at every node x.
GridFunction volterra_sweep(const Kernel& k, const VolterraPlan& plan, const GridFunction& w);

GridFunction volterra_sweep_serial(const Kernel& k, const Region& r, const GridFunction& w, double tol);

/// Node data for e^{-L tau(x)} int_{Lambda(x)} e^{L tau(y)} zeta(y) dy.
struct PhiTables {
  GridDesc grid;
  std::vector<double> tau;
  std::vector<double> zeta;
  std::vector<Box> boxes;
  double tol = 1e-9;
};

/// Throws NegativeWeightFunction if zeta < 0 at a node.
PhiTables make_phi_tables(const Domain& d, const GridDesc& grid, const Expr& zeta, double tol);

/// Weighted integral at one node. Per cell, tau is replaced by its least-squares
/// affine fit and zeta by its multilinear interpolant; the exponential is then
/// integrated in closed form, so the result stays accurate when L h is large.
double phi_at_node(const PhiTables& t, double L, std::size_t node);

double phi_sweep(const PhiTables& t, double L);
double phi_sweep_serial(const PhiTables& t, double L);

}  // namespace volterra
