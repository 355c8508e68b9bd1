#include "volterra/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "volterra/error.hpp"
#include "volterra/parallel.hpp"
#include "volterra/quadrature.hpp"

namespace volterra {

namespace {

std::string point_text(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_shortest(x[i]);
  return s + ")";
}

std::vector<CompiledExpr> compile_all(const std::vector<Expr>& exprs, const Scope& scope) {
  std::vector<CompiledExpr> out;
  out.reserve(exprs.size());
  for (const Expr& e : exprs) out.emplace_back(e, scope);
  return out;
}

double euclid(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void check_envelopes(std::span<const double> lo, std::span<const double> hi, std::span<const double> x,
                     const char* what) {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) {
      throw InvalidMultimap(std::string(what) + " envelopes cross in component " + std::to_string(i + 1) +
                            " at x = " + point_text(x) + ": lower " + format_shortest(lo[i]) + " > upper " +
                            format_shortest(hi[i]));
    }
  }
}

double pick(double lo, double hi, Strategy s) {
  switch (s) {
    case Strategy::lower:
      return lo;
    case Strategy::upper:
      return hi;
    case Strategy::midpoint:
      break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> volterra_apply(const Kernel& k, const Region& r, const GridFunction& w,
                                   std::span<const double> x, double tol) {
  const GridDesc& grid = w.grid();
  const std::size_t m = k.components();
  const std::size_t n = grid.dim();
  std::vector<double> acc(m, 0.0);
  std::vector<double> xy(2 * n);
  std::vector<double> kv(m * m);
  std::copy(x.begin(), x.end(), xy.begin());
  const BoxWeights bw = box_weights(grid, r.at(x), tol);
  for_each_weight(grid, bw, [&](std::size_t y, double weight) {
    grid.point(y, std::span<double>(xy).subspan(n));
    k.eval(xy, kv);
    for (std::size_t row = 0; row < m; ++row) {
      double s = 0.0;
      for (std::size_t c = 0; c < m; ++c) s += kv[row * m + c] * w.at(y, c);
      acc[row] += weight * s;
    }
  });
  return acc;
}

GridFunction nemytskii_select(const MultiMapF& F, const GridFunction& u, Strategy strategy) {
  const GridDesc& grid = u.grid();
  const std::size_t m = F.components();
  if (u.components() != m) throw GridMismatch("selection input has the wrong number of components");
  const Scope scope = value_scope(grid.dim(), m);
  const auto lower = compile_all(F.lower, scope);
  const auto upper = compile_all(F.upper, scope);
  GridFunction out(grid, m);
  parallel_for(grid.size(), [&](std::size_t node) {
    std::vector<double> xu(grid.dim() + m);
    grid.point(node, std::span<double>(xu).first(grid.dim()));
    std::copy(u.value(node).begin(), u.value(node).end(), xu.begin() + static_cast<long>(grid.dim()));
    std::vector<double> lo(m);
    std::vector<double> hi(m);
    for (std::size_t i = 0; i < m; ++i) {
      lo[i] = lower[i](xu);
      hi[i] = upper[i](xu);
    }
    check_envelopes(lo, hi, std::span<const double>(xu).first(grid.dim()), "F");
    for (std::size_t i = 0; i < m; ++i) out.at(node, i) = pick(lo[i], hi[i], strategy);
  });
  return out;
}

double sup_kernel_norm(const Kernel& k, const Region& r, const GridDesc& grid, double tol) {
  const std::size_t n = grid.dim();
  std::vector<double> best(grid.size(), 0.0);
  std::vector<double> y_norm;
  if (k.dependence() == Kernel::Dependence::y_only) {
    y_norm.assign(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t y) {
      std::vector<double> xy(2 * n, 0.0);
      grid.point(y, std::span<double>(xy).subspan(n));
      y_norm[y] = k.norm(xy);
    });
  }
  parallel_for(grid.size(), [&](std::size_t node) {
    std::vector<double> xy(2 * n, 0.0);
    grid.point(node, std::span<double>(xy).first(n));
    const BoxWeights bw = box_weights(grid, r.at(std::span<const double>(xy).first(n)), tol);
    if (bw.empty) return;
    switch (k.dependence()) {
      case Kernel::Dependence::constant:
      case Kernel::Dependence::x_only:
        best[node] = k.norm(xy);
        return;
      case Kernel::Dependence::y_only:
        for_each_weight(grid, bw, [&](std::size_t y, double) { best[node] = std::max(best[node], y_norm[y]); });
        return;
      case Kernel::Dependence::general:
        for_each_weight(grid, bw, [&](std::size_t y, double) {
          grid.point(y, std::span<double>(xy).subspan(n));
          best[node] = std::max(best[node], k.norm(xy));
        });
        return;
    }
  });
  double s = 0.0;
  for (double v : best) s = std::max(s, v);
  return s;
}

Operator::Operator(const ProblemSpec& spec, const GridDesc& grid) : spec_(spec), grid_(grid) {
  spec_.validate();
  const std::size_t n = spec_.dim();
  const std::size_t m = spec_.components;
  if (grid_.dim() != n) throw GridMismatch("operator grid has the wrong dimension");
  kernel_ = Kernel(spec_.kernel, n, m);
  plan_ = make_volterra_plan(spec_.domain.region, grid_, spec_.tol.geom);
  const Scope values = value_scope(n, m);
  f_lower_ = compile_all(spec_.F.lower, values);
  f_upper_ = compile_all(spec_.F.upper, values);
  b_ = CompiledExpr(spec_.F.b, point_scope(n));
  const Scope outer = outer_scope(spec_.outer.form, n, m);
  g_ = compile_all(spec_.outer.g, outer);
  G_lower_ = compile_all(spec_.outer.G_lower, outer);
  G_upper_ = compile_all(spec_.outer.G_upper, outer);
  const Scope mod = modulus_scope();
  phi_ = CompiledExpr(spec_.outer.phi, mod);
  theta_ = CompiledExpr(spec_.outer.theta.value_or(Expr()), mod);
  vartheta_ = CompiledExpr(spec_.outer.vartheta.value_or(Expr()), mod);
}

double Operator::phi(double t) const { return phi_(std::span<const double>(&t, 1)); }
double Operator::theta(double t) const { return theta_(std::span<const double>(&t, 1)); }
double Operator::vartheta(double t) const { return vartheta_(std::span<const double>(&t, 1)); }

void Operator::envelopes(const GridFunction& u, GridFunction& lower, GridFunction& upper) const {
  const std::size_t n = grid_.dim();
  const std::size_t m = components();
  lower = GridFunction(grid_, m);
  upper = GridFunction(grid_, m);
  parallel_for(grid_.size(), [&](std::size_t node) {
    std::vector<double> xu(n + m);
    grid_.point(node, std::span<double>(xu).first(n));
    for (std::size_t i = 0; i < m; ++i) xu[n + i] = u.at(node, i);
    for (std::size_t i = 0; i < m; ++i) {
      lower.at(node, i) = f_lower_[i](xu);
      upper.at(node, i) = f_upper_[i](xu);
    }
    check_envelopes(lower.value(node), upper.value(node), std::span<const double>(xu).first(n), "F");
  });
}

GridFunction Operator::select(const GridFunction& u, Strategy s) const {
  if (!(u.grid() == grid_)) throw GridMismatch("operator input lives on a different grid");
  GridFunction lower;
  GridFunction upper;
  envelopes(u, lower, upper);
  GridFunction out(grid_, components());
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = pick(lower.data()[i], upper.data()[i], s);
  return out;
}

GridFunction Operator::volterra(const GridFunction& w) const { return volterra_sweep(kernel_, plan_, w); }

GridFunction Operator::volterra_serial(const GridFunction& w) const {
  return volterra_sweep_serial(kernel_, spec_.domain.region, w, spec_.tol.geom);
}

void Operator::outer_at(std::span<const double> x, std::span<const double> u, std::span<const double> v,
                        std::span<double> out) const {
  const std::size_t n = x.size();
  const std::size_t m = components();
  std::vector<double> args(n + std::max<std::size_t>(m, 2));
  std::copy(x.begin(), x.end(), args.begin());
  switch (spec_.outer.form) {
    case Form::single:
      for (std::size_t i = 0; i < m; ++i) args[n + i] = u[i];
      for (std::size_t i = 0; i < m; ++i) out[i] = g_[i](args) + v[i];
      return;
    case Form::composite:
      args[n] = u[0];
      args[n + 1] = v[0];
      out[0] = g_[0](args);
      return;
    case Form::set_valued: {
      const Point s = steiner(G_at(x, v));
      std::copy(s.begin(), s.end(), out.begin());
      return;
    }
  }
}

ConvexSet Operator::G_at(std::span<const double> x, std::span<const double> z) const {
  const std::size_t n = x.size();
  const std::size_t m = components();
  std::vector<double> args(n + m);
  std::copy(x.begin(), x.end(), args.begin());
  std::copy(z.begin(), z.end(), args.begin() + static_cast<long>(n));
  IntervalBox box{Point(m), Point(m)};
  for (std::size_t i = 0; i < m; ++i) {
    box.lower[i] = G_lower_[i](args);
    box.upper[i] = G_upper_[i](args);
  }
  check_envelopes(box.lower, box.upper, x, "G");
  return ConvexSet(std::move(box));
}

GridFunction Operator::outer(const GridFunction& u, const GridFunction& v) const {
  const std::size_t n = grid_.dim();
  GridFunction out(grid_, components());
  parallel_for(grid_.size(), [&](std::size_t node) {
    std::vector<double> x(n);
    grid_.point(node, x);
    outer_at(x, u.value(node), v.value(node), out.value(node));
  });
  return out;
}

GridFunction Operator::apply(const GridFunction& u, Strategy s) const { return outer(u, volterra(select(u, s))); }

GridFunction Operator::initial() const {
  const GridFunction zero(grid_, components());
  return outer(zero, zero);
}

GridFunction H_apply(const ProblemSpec& spec, const GridFunction& u) { return Operator(spec, u.grid()).apply(u); }

HypothesisReport check_hypotheses(const ProblemSpec& spec, int n, std::size_t samples) {
  spec.validate();
  HypothesisReport report;
  const Domain& d = spec.domain;
  const std::size_t N = spec.dim();
  const std::size_t m = spec.components;
  const GridDesc grid = d.grid(n, spec.h);
  const Operator op(spec, grid);
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_node(0, grid.size() - 1);
  const double tol = 1e-12;

  auto add = [&](HypothesisItem item) {
    report.pass = report.pass && item.pass;
    report.items.push_back(std::move(item));
  };
  auto fail = [](HypothesisItem& item, const std::string& witness) {
    item.pass = false;
    ++item.violations;
    if (item.witness.empty()) item.witness = witness;
  };
  auto random_u = [&](double radius) {
    std::vector<double> u(m);
    for (double& c : u) c = radius * (2.0 * unit(rng) - 1.0);
    return u;
  };
  auto node_point = [&](std::size_t node) {
    std::vector<double> x(N);
    grid.point(node, x);
    return x;
  };
  auto joined = [](std::span<const double> a, std::span<const double> b) {
    std::vector<double> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
  };

  {
    HypothesisItem item{"exhaustion nested"};
    item.checked = static_cast<std::size_t>(n) + 1;
    if (auto bad = d.exhaustion.first_nesting_violation(n + 2)) {
      fail(item, "Omega_" + std::to_string(*bad) + " does not contain Omega_" + std::to_string(*bad - 1));
    }
    add(item);
  }
  {
    const InvarianceReport inv = check_lambda_invariance(d.exhaustion, d.region, n, grid, spec.tol);
    HypothesisItem item{"Lambda invariance"};
    item.checked = inv.checked;
    if (!inv.pass) {
      fail(item, "Lambda(x) leaves Omega_" + std::to_string(n) + " by " + format_shortest(inv.worst_excess) +
                     " at x = " + point_text(inv.worst_point));
    }
    add(item);
  }
  {
    HypothesisItem item{"tau positive"};
    const Box& omega = d.omega;
    for (std::size_t node = 0; node < grid.size(); ++node) {
      const auto x = node_point(node);
      bool interior = true;
      for (std::size_t i = 0; i < N; ++i) {
        interior = interior && x[i] > omega.lower[i] + spec.tol.geom && x[i] < omega.upper[i] - spec.tol.geom;
      }
      const double t = d.tau(x);
      ++item.checked;
      if (!(interior ? t > 0.0 : t >= 0.0) || !std::isfinite(t)) {
        fail(item, "tau = " + format_shortest(t) + " at x = " + point_text(x));
      }
    }
    add(item);
  }
  {
    const auto probes = default_tau_probes(d, n, spec.h);
    const AdmissibilityReport adm = check_tau_admissible(d.tau, d.region, probes, spec.tol);
    HypothesisItem item{"tau admissible"};
    item.checked = adm.probes.size();
    for (const auto& p : adm.probes) {
      if (!p.pass) {
        fail(item, "no x near x0 = " + point_text(p.probe.x0) + " with sup tau below tau(x0) = " +
                       format_shortest(p.tau_x0) + " (best " + format_shortest(p.best_sup) + ")");
      }
    }
    add(item);
  }
  {
    HypothesisItem item{"b and eta nonnegative"};
    const CompiledExpr b(spec.F.b, point_scope(N));
    const CompiledExpr eta(spec.F.eta, point_scope(N));
    for (std::size_t node = 0; node < grid.size(); ++node) {
      const auto x = node_point(node);
      ++item.checked;
      if (!(b(x) >= 0.0) || !(eta(x) >= 0.0)) {
        fail(item, "b = " + format_shortest(b(x)) + ", eta = " + format_shortest(eta(x)) + " at x = " + point_text(x));
      }
    }
    add(item);
  }

  const Scope values = value_scope(N, m);
  const auto f_lower = compile_all(spec.F.lower, values);
  const auto f_upper = compile_all(spec.F.upper, values);
  {
    HypothesisItem order{"F envelopes ordered"};
    HypothesisItem growth{"F growth bound"};
    for (std::size_t s = 0; s < samples; ++s) {
      const auto x = node_point(any_node(rng));
      const auto u = random_u(s % 2 ? 10.0 : 1.0);
      const auto xu = joined(x, u);
      double sup2 = 0.0;
      ++order.checked;
      ++growth.checked;
      for (std::size_t i = 0; i < m; ++i) {
        const double lo = f_lower[i](xu);
        const double hi = f_upper[i](xu);
        if (lo > hi) fail(order, "lower " + format_shortest(lo) + " > upper " + format_shortest(hi) + " at (x, u) = " + point_text(xu));
        const double big = std::max(std::fabs(lo), std::fabs(hi));
        sup2 += big * big;
      }
      const double bound = op.b_at(x) * (1.0 + euclid(u));
      if (std::sqrt(sup2) > bound + tol * (1.0 + bound)) {
        fail(growth, "|F| = " + format_shortest(std::sqrt(sup2)) + " > b(x)(1+|u|) = " + format_shortest(bound) +
                         " at (x, u) = " + point_text(xu));
      }
    }
    add(order);
    add(growth);
  }
  {
    HypothesisItem item{"phi modulus class"};
    const double zero = op.phi(0.0);
    ++item.checked;
    if (std::fabs(zero) > tol) fail(item, "phi(0) = " + format_shortest(zero));
    double prev = zero;
    for (int k = -12; k <= 12; ++k) {
      const double t = std::pow(10.0, k / 2.0);
      const double v = op.phi(t);
      ++item.checked;
      if (!(v >= 0.0)) fail(item, "phi(" + format_shortest(t) + ") = " + format_shortest(v) + " < 0");
      if (v < prev - tol * (1.0 + std::fabs(prev))) fail(item, "phi decreases before x = " + format_shortest(t));
      if (!(v < t)) fail(item, "phi(" + format_shortest(t) + ") = " + format_shortest(v) + " is not below x");
      prev = v;
    }
    add(item);
  }
  {
    HypothesisItem item{"outer map modulus"};
    const double scales[] = {1e-3, 1e-1, 1.0, 10.0};
    for (std::size_t s = 0; s < samples; ++s) {
      const auto x = node_point(any_node(rng));
      const double scale = scales[s % 4];
      const auto u = random_u(10.0);
      auto w = u;
      for (double& c : w) c += scale * (2.0 * unit(rng) - 1.0);
      ++item.checked;
      switch (spec.outer.form) {
        case Form::single: {
          std::vector<double> zero(m, 0.0);
          std::vector<double> gu(m);
          std::vector<double> gw(m);
          op.outer_at(x, u, zero, gu);
          op.outer_at(x, w, zero, gw);
          const double lhs = distance(gu, gw);
          const double rhs = op.phi(distance(u, w));
          if (lhs > rhs + tol * (1.0 + lhs)) {
            fail(item, "|g(x,u) - g(x,w)| = " + format_shortest(lhs) + " > phi(|u-w|) = " + format_shortest(rhs) +
                           " at x = " + point_text(x) + ", u = " + point_text(u) + ", w = " + point_text(w));
          }
          break;
        }
        case Form::composite: {
          const auto z = random_u(10.0);
          auto z2 = z;
          z2[0] += scale * (2.0 * unit(rng) - 1.0);
          double gu = 0.0;
          double gw = 0.0;
          op.outer_at(x, u, z, std::span<double>(&gu, 1));
          op.outer_at(x, w, z2, std::span<double>(&gw, 1));
          const double lhs = std::fabs(gu - gw);
          const double rhs = op.phi(std::fabs(u[0] - w[0])) + op.vartheta(std::fabs(z[0] - z2[0]));
          if (lhs > rhs + tol * (1.0 + lhs)) {
            fail(item, "|g(x,u1,u2) - g(x,w1,w2)| = " + format_shortest(lhs) + " > " + format_shortest(rhs) +
                           " at x = " + point_text(x));
          }
          break;
        }
        case Form::set_valued: {
          auto x2 = x;
          if (spec.outer.theta) x2 = node_point(any_node(rng));
          const double lhs = hausdorff(op.G_at(x, u), op.G_at(x2, w));
          const double rhs = op.theta(distance(x, x2)) + op.phi(distance(u, w));
          if (lhs > rhs + tol * (1.0 + lhs)) {
            fail(item, "h(G(x,u), G(y,w)) = " + format_shortest(lhs) + " > theta + phi = " + format_shortest(rhs) +
                           " at x = " + point_text(x) + ", y = " + point_text(x2));
          }
          break;
        }
      }
    }
    add(item);
  }
  {
    HypothesisItem item{"kernel continuity"};
    const Kernel& k = op.kernel();
    std::vector<double> k0(m * m);
    std::vector<double> k1(m * m);
    std::vector<double> k2(m * m);
    std::uniform_int_distribution<std::size_t> any_axis(0, N - 1);
    const double step = grid.max_step() > 0.0 ? grid.max_step() : spec.h;
    for (std::size_t s = 0; s < samples; ++s) {
      const auto x = node_point(any_node(rng));
      const Box lam = d.region.at(x);
      if (lam.empty()) continue;
      std::vector<double> y(N);
      for (std::size_t i = 0; i < N; ++i) y[i] = lam.lower[i] + unit(rng) * (lam.upper[i] - lam.lower[i]);
      const std::size_t axis = any_axis(rng);
      const double dir = x[axis] + step < d.omega.upper[axis] ? 1.0 : -1.0;
      auto x1 = x;
      auto x2 = x;
      x1[axis] += dir * step;
      x2[axis] += dir * step / 4.0;
      if (!d.omega.contains_point(x1, 0.0) || !d.omega.contains_point(x2, 0.0)) continue;
      ++item.checked;
      try {
        k.eval(joined(x, y), k0);
        k.eval(joined(x1, y), k1);
        k.eval(joined(x2, y), k2);
      } catch (const KernelEval& e) {
        fail(item, e.what());
        continue;
      }
      double d1 = 0.0;
      double d2 = 0.0;
      double size = 0.0;
      for (std::size_t i = 0; i < k0.size(); ++i) {
        d1 = std::max(d1, std::fabs(k1[i] - k0[i]));
        d2 = std::max(d2, std::fabs(k2[i] - k0[i]));
        size = std::max(size, std::fabs(k0[i]));
      }
      if (d2 > 0.5 * d1 + 1e-9 * (1.0 + size)) {
        fail(item, "k(., y) does not settle near x = " + point_text(x) + " (y = " + point_text(y) + ")");
      }
    }
    add(item);
  }
  return report;
}

}  // namespace volterra
