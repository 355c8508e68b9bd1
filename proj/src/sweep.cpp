#include "volterra/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "volterra/error.hpp"
#include "volterra/parallel.hpp"

namespace volterra {

namespace {

void product_accumulate(std::span<const double> k, std::span<const double> w, double weight, std::size_t m,
                        std::span<double> acc) {
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s += k[r * m + c] * w[c];
    acc[r] += weight * s;
  }
}

// acc += int of the piecewise-linear interpolant of f over the box, row by row.
void accumulate_rows(const GridDesc& grid, const BoxWeights& bw, const GridFunction& f, std::span<double> acc) {
  const std::size_t m = f.components();
  const double* data = f.data().data();
  for_each_row(grid, bw, [&](std::size_t base, double weight, std::span<const double> row) {
    for (std::size_t c = 0; c < m; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * data[(base + j) * m + c];
      acc[c] += weight * s;
    }
  });
}

// E0(b) = int_0^1 e^{bt} dt, E1(b) = int_0^1 t e^{bt} dt, D = E0 - E1; b <= 0.
struct ExpMoments {
  double e0, e1, d;
};

ExpMoments exp_moments(double b) {
  if (std::fabs(b) < 0.5) {
    double e1 = 0.0;
    double d = 0.0;
    double term = 1.0;  // b^k / k!
    for (int k = 0; k < 24 && term != 0.0; ++k) {
      e1 += term / (k + 2);
      d += term / ((k + 1.0) * (k + 2.0));
      term *= b / (k + 1);
      if (std::fabs(term) < 1e-18) break;
    }
    return {e1 + d, e1, d};
  }
  const double em = std::expm1(b);
  const double e0 = em / b;
  const double d = (em - b) / (b * b);
  return {e0, e0 - d, d};
}

constexpr std::size_t kMaxPhiDim = 8;

struct AxisFactors {
  double j0, j1, shift;
};

// int_alpha^beta (1-s) e^{a s} ds and int s e^{a s} ds, with e^{shift} factored out.
AxisFactors axis_factors(double a, double alpha, double beta) {
  const double len = beta - alpha;
  if (a <= 0.0) {
    const ExpMoments m = exp_moments(a * len);
    return {len * ((1.0 - beta) * m.e0 + len * m.d), len * (alpha * m.e0 + len * m.e1), a * alpha};
  }
  const ExpMoments m = exp_moments(-a * len);
  return {len * ((1.0 - beta) * m.e0 + len * m.e1), len * (alpha * m.e0 + len * m.d), a * beta};
}

}  // namespace

VolterraPlan make_volterra_plan(const Region& r, const GridDesc& grid, double tol) {
  VolterraPlan plan{grid, std::vector<BoxWeights>(grid.size())};
  parallel_for(grid.size(), [&](std::size_t node) {
    std::vector<double> x(grid.dim());
    grid.point(node, x);
    plan.boxes[node] = box_weights(grid, r.at(x), tol);
  });
  return plan;
}

GridFunction volterra_sweep(const Kernel& k, const VolterraPlan& plan, const GridFunction& w) {
  const GridDesc& grid = plan.grid;
  if (!(w.grid() == grid)) throw GridMismatch("Volterra input lives on a different grid");
  const std::size_t m = k.components();
  const std::size_t n = grid.dim();
  if (w.components() != m) throw GridMismatch("Volterra input has the wrong number of components");
  GridFunction out(grid, m);

  if (k.dependence() == Kernel::Dependence::general) {
    parallel_for(grid.size(), [&](std::size_t node) {
      std::vector<double> xy(2 * n);
      std::vector<double> kv(m * m);
      grid.point(node, std::span<double>(xy).first(n));
      std::span<double> acc = out.value(node);
      for_each_weight(grid, plan.boxes[node], [&](std::size_t y, double weight) {
        grid.point(y, std::span<double>(xy).subspan(n));
        k.eval(xy, kv);
        product_accumulate(kv, w.value(y), weight, m, acc);
      });
    });
    return out;
  }

  if (k.dependence() == Kernel::Dependence::x_only) {
    parallel_for(grid.size(), [&](std::size_t node) {
      std::vector<double> xy(2 * n, 0.0);
      std::vector<double> kv(m * m);
      std::vector<double> sum(m, 0.0);
      accumulate_rows(grid, plan.boxes[node], w, sum);
      if (plan.boxes[node].empty) return;
      grid.point(node, std::span<double>(xy).first(n));
      k.eval(xy, kv);
      product_accumulate(kv, sum, 1.0, m, out.value(node));
    });
    return out;
  }

  // k depends on y at most: fold it into the integrand once.
  GridFunction q(grid, m);
  parallel_for(grid.size(), [&](std::size_t y) {
    std::vector<double> xy(2 * n, 0.0);
    std::vector<double> kv(m * m);
    grid.point(y, std::span<double>(xy).subspan(n));
    k.eval(xy, kv);
    product_accumulate(kv, w.value(y), 1.0, m, q.value(y));
  });
  parallel_for(grid.size(), [&](std::size_t node) {
    accumulate_rows(grid, plan.boxes[node], q, out.value(node));
  });
  return out;
}

GridFunction volterra_sweep_serial(const Kernel& k, const Region& r, const GridFunction& w, double tol) {
  const GridDesc& grid = w.grid();
  const std::size_t m = k.components();
  const std::size_t n = grid.dim();
  GridFunction out(grid, m);
  std::vector<double> xy(2 * n);
  std::vector<double> kv(m * m);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.point(node, std::span<double>(xy).first(n));
    const BoxWeights bw = box_weights(grid, r.at(std::span<const double>(xy).first(n)), tol);
    std::span<double> acc = out.value(node);
    for_each_weight(grid, bw, [&](std::size_t y, double weight) {
      grid.point(y, std::span<double>(xy).subspan(n));
      k.eval(xy, kv);
      product_accumulate(kv, w.value(y), weight, m, acc);
    });
  }
  return out;
}

PhiTables make_phi_tables(const Domain& d, const GridDesc& grid, const Expr& zeta, double tol) {
  PhiTables t{grid, std::vector<double>(grid.size()), std::vector<double>(grid.size()),
              std::vector<Box>(grid.size()), tol};
  const CompiledExpr z(zeta, point_scope(grid.dim()));
  std::vector<double> x(grid.dim());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.point(node, x);
    t.tau[node] = d.tau(x);
    t.zeta[node] = z(x);
    if (!(t.zeta[node] >= 0.0)) {
      std::string where;
      for (std::size_t j = 0; j < x.size(); ++j) where += (j ? ", " : "") + format_shortest(x[j]);
      throw NegativeWeightFunction("weight function " + zeta.render() + " is " + format_shortest(t.zeta[node]) +
                                   " at (" + where + ")");
    }
    t.boxes[node] = d.region.at(x);
  }
  return t;
}

namespace {

// Log-scale weight and moment sum of one grid cell clipped to the pieces `pieces`;
// the cell integral of e^{L tau} zeta is e^{log} * sum.
struct CellTerm {
  double log = 0.0;
  double sum = 0.0;
};

CellTerm cell_term(const PhiTables& t, double L, std::size_t base, std::span<const CellPiece> pieces) {
  const GridDesc& grid = t.grid;
  const std::size_t n = grid.dim();
  const std::size_t corners = std::size_t{1} << n;
  std::size_t corner_flat[1u << kMaxPhiDim];
  double slope[kMaxPhiDim] = {};
  AxisFactors f[kMaxPhiDim];
  double mean = 0.0;
  for (std::size_t c = 0; c < corners; ++c) {
    std::size_t flat = base;
    for (std::size_t a = 0; a < n; ++a) {
      if ((c >> a) & 1) flat += grid.stride(a);
    }
    corner_flat[c] = flat;
    const double v = t.tau[flat];
    mean += v;
    for (std::size_t a = 0; a < n; ++a) slope[a] += (c >> a) & 1 ? v : -v;
  }
  const double scale = 1.0 / static_cast<double>(corners);
  mean *= scale;
  double offset = mean;
  for (std::size_t a = 0; a < n; ++a) {
    slope[a] *= 2.0 * scale;
    offset -= 0.5 * slope[a];
  }
  CellTerm term{L * offset, 0.0};
  double measure = 1.0;
  for (std::size_t a = 0; a < n; ++a) {
    f[a] = axis_factors(L * slope[a], pieces[a].alpha, pieces[a].beta);
    term.log += f[a].shift;
    measure *= grid.step(a);
  }
  for (std::size_t c = 0; c < corners; ++c) {
    double v = t.zeta[corner_flat[c]];
    for (std::size_t a = 0; a < n; ++a) v *= (c >> a) & 1 ? f[a].j1 : f[a].j0;
    term.sum += v;
  }
  term.sum *= measure;
  return term;
}

bool is_cell_base(const GridDesc& grid, std::size_t node) {
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    if (grid.index_along(node, a) + 1 >= grid.count(a)) return false;
  }
  return true;
}

void check_phi_dim(const PhiTables& t) {
  if (t.grid.dim() > kMaxPhiDim) throw Error("phi supports at most " + std::to_string(kMaxPhiDim) + " dimensions");
}

// Full-cell terms for every cell, indexed by the flat index of its lowest corner.
template <typename For>
std::vector<CellTerm> full_cells(const PhiTables& t, double L, For&& for_each) {
  const std::size_t n = t.grid.dim();
  std::vector<CellTerm> cells(t.grid.size());
  const std::vector<CellPiece> full(n, CellPiece{0, 0.0, 1.0});
  for_each(t.grid.size(), [&](std::size_t node) {
    if (is_cell_base(t.grid, node)) cells[node] = cell_term(t, L, node, full);
  });
  return cells;
}

double phi_at_node_cached(const PhiTables& t, double L, std::size_t node, const std::vector<CellTerm>* cache) {
  const GridDesc& grid = t.grid;
  const Box& box = t.boxes[node];
  if (box.empty()) return 0.0;
  const std::size_t n = grid.dim();
  std::vector<std::vector<CellPiece>> cells(n);
  for (std::size_t a = 0; a < n; ++a) {
    cells[a] = axis_cells(grid, a, box.lower[a], box.upper[a], t.tol);
    if (cells[a].empty()) return 0.0;
  }
  const double tx = L * t.tau[node];
  std::vector<std::size_t> idx(n, 0);
  std::vector<CellPiece> pieces(n);
  double total = 0.0;
  for (;;) {
    std::size_t base = 0;
    bool full = true;
    for (std::size_t a = 0; a < n; ++a) {
      pieces[a] = cells[a][idx[a]];
      base += pieces[a].cell * grid.stride(a);
      full = full && pieces[a].alpha == 0.0 && pieces[a].beta == 1.0;
    }
    const CellTerm term = full && cache ? (*cache)[base] : cell_term(t, L, base, pieces);
    if (term.sum != 0.0) total += std::exp(term.log - tx) * term.sum;

    std::size_t a = n;
    while (a > 0) {
      --a;
      if (++idx[a] < cells[a].size()) break;
      idx[a] = 0;
      if (a == 0) return total;
    }
  }
}

void serial_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace

double phi_at_node(const PhiTables& t, double L, std::size_t node) {
  check_phi_dim(t);
  return phi_at_node_cached(t, L, node, nullptr);
}

double phi_sweep(const PhiTables& t, double L) {
  check_phi_dim(t);
  auto pfor = [](std::size_t n, auto&& body) { parallel_for(n, body); };
  const std::vector<CellTerm> cache = full_cells(t, L, pfor);
  std::vector<double> values(t.grid.size());
  parallel_for(values.size(), [&](std::size_t node) { values[node] = phi_at_node_cached(t, L, node, &cache); });
  double best = 0.0;
  for (double v : values) best = std::max(best, v);
  return best;
}

double phi_sweep_serial(const PhiTables& t, double L) {
  check_phi_dim(t);
  const std::vector<CellTerm> cache = full_cells(t, L, serial_for);
  double best = 0.0;
  for (std::size_t node = 0; node < t.grid.size(); ++node) {
    best = std::max(best, phi_at_node_cached(t, L, node, &cache));
  }
  return best;
}

}  // namespace volterra
