#include "volterra/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "volterra/error.hpp"
#include "volterra/parallel.hpp"
#include "volterra/quadrature.hpp"

namespace volterra {

namespace {

constexpr int kWindow = 10;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double euclid_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Distance from p to the box [lo, hi].
double box_distance(std::span<const double> p, std::span<const double> lo, std::span<const double> hi) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = std::max({lo[i] - p[i], p[i] - hi[i], 0.0});
    s += e * e;
  }
  return std::sqrt(s);
}

void require_shared(const FunctionFamily& fam) {
  for (std::size_t i = 1; i < fam.members.size(); ++i) fam.members[0].require_compatible(fam.members[i]);
}

/// Visits each pair of nodes one step apart along some axis.
template <typename Visit>
void for_each_adjacent(const GridDesc& grid, Visit&& visit) {
  for (std::size_t node = 0; node < grid.size(); ++node) {
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      if (grid.index_along(node, a) + 1 < grid.count(a)) visit(node, node + grid.stride(a));
    }
  }
}

/// Componentwise bounds of the Volterra integral over all selections of F(., u).
void volterra_envelopes(const Operator& op, const GridFunction& u, GridFunction& vlo, GridFunction& vhi) {
  const GridDesc& grid = op.grid();
  const std::size_t n = grid.dim();
  const std::size_t m = op.components();
  GridFunction flo;
  GridFunction fhi;
  op.envelopes(u, flo, fhi);
  vlo = GridFunction(grid, m);
  vhi = GridFunction(grid, m);
  const Region& r = op.spec().domain.region;
  parallel_for(grid.size(), [&](std::size_t node) {
    std::vector<double> xy(2 * n);
    std::vector<double> kv(m * m);
    grid.point(node, std::span<double>(xy).first(n));
    const BoxWeights bw = box_weights(grid, r.at(std::span<const double>(xy).first(n)), op.spec().tol.geom);
    for_each_weight(grid, bw, [&](std::size_t y, double weight) {
      grid.point(y, std::span<double>(xy).subspan(n));
      op.kernel().eval(xy, kv);
      for (std::size_t row = 0; row < m; ++row) {
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
          const double p = kv[row * m + c] * flo.at(y, c);
          const double q = kv[row * m + c] * fhi.at(y, c);
          lo += std::min(p, q);
          hi += std::max(p, q);
        }
        vlo.at(node, row) += weight * lo;
        vhi.at(node, row) += weight * hi;
      }
    });
  });
}

/// Corners and centre of the box [lo, hi].
std::vector<std::vector<double>> box_samples(std::span<const double> lo, std::span<const double> hi) {
  const std::size_t m = lo.size();
  std::vector<std::vector<double>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    std::vector<double> z(m);
    for (std::size_t i = 0; i < m; ++i) z[i] = (mask >> i) & 1 ? hi[i] : lo[i];
    out.push_back(std::move(z));
  }
  std::vector<double> mid(m);
  for (std::size_t i = 0; i < m; ++i) mid[i] = 0.5 * (lo[i] + hi[i]);
  out.push_back(std::move(mid));
  return out;
}

}  // namespace

double residual(const Operator& op, const GridFunction& u) {
  const GridDesc& grid = op.grid();
  const ProblemSpec& spec = op.spec();
  const std::size_t n = grid.dim();
  const std::size_t m = op.components();
  if (!(u.grid() == grid) || u.components() != m) throw GridMismatch("residual input lives on a different grid");

  GridFunction vlo;
  GridFunction vhi;
  if (spec.F.singleton()) {
    vlo = op.volterra(op.select(u, Strategy::midpoint));
    vhi = vlo;
  } else {
    volterra_envelopes(op, u, vlo, vhi);
  }
  std::vector<double> dist(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t node) {
    std::vector<double> x(n);
    grid.point(node, x);
    const auto un = u.value(node);
    switch (spec.outer.form) {
      case Form::single: {
        std::vector<double> g(m);
        std::vector<double> zero(m, 0.0);
        op.outer_at(x, un, zero, g);
        std::vector<double> lo(m);
        std::vector<double> hi(m);
        for (std::size_t i = 0; i < m; ++i) {
          lo[i] = g[i] + vlo.at(node, i);
          hi[i] = g[i] + vhi.at(node, i);
        }
        dist[node] = box_distance(un, lo, hi);
        return;
      }
      case Form::composite: {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& z : box_samples(vlo.value(node), vhi.value(node))) {
          double v = 0.0;
          op.outer_at(x, un, z, std::span<double>(&v, 1));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        dist[node] = box_distance(un, std::span<const double>(&lo, 1), std::span<const double>(&hi, 1));
        return;
      }
      case Form::set_valued: {
        std::vector<double> lo(m, std::numeric_limits<double>::infinity());
        std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
        for (const auto& z : box_samples(vlo.value(node), vhi.value(node))) {
          const ConvexSet G = op.G_at(x, z);
          const auto& box = std::get<IntervalBox>(G.shape());
          for (std::size_t i = 0; i < m; ++i) {
            lo[i] = std::min(lo[i], box.lower[i]);
            hi[i] = std::max(hi[i], box.upper[i]);
          }
        }
        dist[node] = box_distance(un, lo, hi);
        return;
      }
    }
  });
  double best = 0.0;
  for (double d : dist) best = std::max(best, d);
  return best;
}

double residual(const ProblemSpec& spec, const GridFunction& u) { return residual(Operator(spec, u.grid()), u); }

SolveReport picard_solve(const ProblemSpec& spec, const WeightSchedule& sched) {
  spec.validate();
  const Operator op(spec, spec.grid());
  SolveReport rep;
  rep.schedule = sched.at(spec.n);
  const double L = rep.schedule.L;
  const TauMap& tau = spec.domain.tau;

  GridFunction u = op.initial();
  std::vector<double> ratios;
  for (int k = 1; k <= spec.max_iter; ++k) {
    GridFunction v = op.apply(u);
    const GridFunction diff = v - u;
    const double sd = sup_norm(diff);
    const double wd = bielecki_norm(diff, L, tau);
    const double scale = std::max(1.0, sup_norm(v));
    if (!rep.deltas.empty() && rep.deltas.back() > 0.0 && rep.sup_deltas.back() > 1e-13 * scale) {
      ratios.push_back(wd / rep.deltas.back());
    }
    rep.deltas.push_back(wd);
    rep.sup_deltas.push_back(sd);
    u = std::move(v);
    rep.iterations = k;
    if (!std::isfinite(sd)) throw NonContractive("Picard iterates left the floating-point range at step " + std::to_string(k));
    if (sd < spec.tol_fix || sd == 0.0) {
      rep.converged = true;
      break;
    }
    if (ratios.size() >= static_cast<std::size_t>(kWindow)) {
      const std::vector<double> tail(ratios.end() - kWindow, ratios.end());
      const double med = median(tail);
      if (med >= 1.0) {
        throw NonContractive("median step ratio " + format_shortest(med) + " over the last " +
                             std::to_string(kWindow) + " iterations (step " + std::to_string(k) + ")");
      }
    }
  }
  rep.ratio = median(ratios);
  rep.solution = u;
  rep.residual = residual(op, u);

  const GridDesc& grid = op.grid();
  std::vector<double> x(grid.dim());
  double measure = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.point(node, x);
    measure = std::max(measure, region_measure(spec.domain.region, x));
  }
  const double w = sup_norm(op.select(u, spec.strategy));
  const double h = grid.max_step();
  const double K = sup_kernel_norm(op.kernel(), spec.domain.region, grid, spec.tol.geom);
  rep.quadrature_tolerance = K * measure * w * h * h;
  return rep;
}

double equicontinuity_modulus(const FunctionFamily& fam) {
  if (fam.members.empty()) return 0.0;
  require_shared(fam);
  const GridDesc& grid = fam.members[0].grid();
  double best = 0.0;
  for (const GridFunction& f : fam.members) {
    for_each_adjacent(grid, [&](std::size_t a, std::size_t b) {
      best = std::max(best, euclid_diff(f.value(a), f.value(b)));
    });
  }
  return best;
}

CondensingReport condensing_check(const ProblemSpec& spec, const WeightSchedule& sched, const FunctionFamily& fam) {
  CondensingReport rep;
  if (fam.members.empty()) {
    rep.pass = true;
    return rep;
  }
  require_shared(fam);
  const GridDesc& grid = fam.members[0].grid();
  const Operator op(spec, grid);
  const std::size_t n = grid.dim();
  const std::size_t m = op.components();
  const Region& region = spec.domain.region;
  const Kernel& k = op.kernel();

  if (sched.has(spec.n)) {
    const ScheduleRow& row = sched.at(spec.n);
    for (const GridFunction& f : fam.members) {
      rep.within_invariant_set =
          rep.within_invariant_set && bielecki_norm(f, row.L, spec.domain.tau) <= row.a * (1.0 + 1e-12);
    }
  }

  FunctionFamily image;
  std::vector<GridFunction> volterra_terms;
  double w_max = 0.0;
  std::vector<double> x(n);
  for (const GridFunction& f : fam.members) {
    const GridFunction w = op.select(f, spec.strategy);
    for (std::size_t node = 0; node < grid.size(); ++node) {
      grid.point(node, x);
      w_max = std::max({w_max, w.magnitude(node), op.b_at(x) * (1.0 + f.magnitude(node))});
    }
    volterra_terms.push_back(op.volterra(w));
    image.members.push_back(op.outer(f, volterra_terms.back()));
  }
  rep.eps_in = equicontinuity_modulus(fam);
  rep.eps_out = equicontinuity_modulus(image);
  rep.phi_eps_in = op.phi(rep.eps_in);

  const double k_max = sup_kernel_norm(k, region, grid, spec.tol.geom);
  const Box grid_box{[&] {
                       std::vector<double> v(n);
                       for (std::size_t a = 0; a < n; ++a) v[a] = grid.lower(a);
                       return v;
                     }(),
                     [&] {
                       std::vector<double> v(n);
                       for (std::size_t a = 0; a < n; ++a) v[a] = grid.upper(a);
                       return v;
                     }()};
  const double lip = steiner_lipschitz_constant(m);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for_each_adjacent(grid, [&](std::size_t a, std::size_t b) { pairs.emplace_back(a, b); });
  std::vector<double> pair_slack(pairs.size(), 0.0);
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [ia, ib] = pairs[p];
    std::vector<double> xa(n);
    std::vector<double> xb(n);
    grid.point(ia, xa);
    grid.point(ib, xb);
    const Box la = region.at(xa).intersect(grid_box);
    const Box lb = region.at(xb).intersect(grid_box);

    double dk = 0.0;
    if (k.dependence() == Kernel::Dependence::x_only || k.dependence() == Kernel::Dependence::general) {
      std::vector<double> ya(2 * n);
      std::vector<double> yb(2 * n);
      std::copy(xa.begin(), xa.end(), ya.begin());
      std::copy(xb.begin(), xb.end(), yb.begin());
      std::vector<double> ka(m * m);
      std::vector<double> kb(m * m);
      std::vector<double> diff(m * m);
      const BoxWeights bw = box_weights(grid, lb, spec.tol.geom);
      auto visit = [&](std::size_t y) {
        grid.point(y, std::span<double>(ya).subspan(n));
        grid.point(y, std::span<double>(yb).subspan(n));
        k.eval(ya, ka);
        k.eval(yb, kb);
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = ka[i] - kb[i];
        dk = std::max(dk, matrix_norm(diff, m));
      };
      if (k.dependence() == Kernel::Dependence::x_only) {
        if (!bw.empty) visit(0);
      } else {
        for_each_weight(grid, bw, [&](std::size_t y, double) { visit(y); });
      }
    }
    const double measure_b = lb.empty() ? 0.0 : lb.measure();
    const double omega_v =
        (k_max * w_max * symmetric_difference_measure(la, lb) + dk * w_max * measure_b) * (1.0 + 1e-12);

    // Change of the outer map in x alone, measured on the actual members.
    double omega_g = 0.0;
    std::vector<double> va(m);
    std::vector<double> vb(m);
    for (std::size_t j = 0; j < fam.members.size(); ++j) {
      const auto ub = fam.members[j].value(ib);
      const auto vterm = volterra_terms[j].value(ib);
      op.outer_at(xa, ub, vterm, va);
      op.outer_at(xb, ub, vterm, vb);
      omega_g = std::max(omega_g, euclid_diff(va, vb));
    }
    double part = omega_v;
    if (spec.outer.form == Form::composite) part = op.vartheta(omega_v);
    if (spec.outer.form == Form::set_valued) part = lip * op.phi(omega_v);
    pair_slack[p] = omega_g + part;
  });
  for (double s : pair_slack) rep.slack = std::max(rep.slack, s);
  const double h = grid.max_step();
  rep.C_slack = h > 0.0 ? rep.slack / h : 0.0;
  rep.pass = rep.eps_out <= rep.phi_eps_in + rep.slack;
  return rep;
}

CertificateResult condensing_certificate(std::span<const double> xs, std::span<const double> ys,
                                         std::span<const double> ks) {
  if (xs.size() != ys.size() || xs.size() != ks.size()) {
    throw LengthMismatch("certificate sequences differ in length");
  }
  CertificateResult res;
  bool nonnegative = true;
  bool positive = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(ks[i] > 0.0 && ks[i] < 1.0)) throw Error("certificate coefficient k_n must lie in (0, 1)");
    const double v = ks[i] * ys[i] - xs[i];
    res.values.push_back(v);
    nonnegative = nonnegative && v >= 0.0;
    positive = positive || v > 0.0;
  }
  res.certified = nonnegative && positive;
  return res;
}

MncAxiomReport mnc_axiom_check(const FunctionFamily& fam, const GridFunction& extra) {
  MncAxiomReport rep;
  require_shared(fam);
  if (!fam.members.empty()) fam.members[0].require_compatible(extra);
  const GridDesc& grid = extra.grid();
  rep.step = grid.max_step();
  rep.e_family = equicontinuity_modulus(fam);
  FunctionFamily joined = fam;
  joined.members.push_back(extra);
  rep.e_adjoined = equicontinuity_modulus(joined);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      if (grid.index_along(node, a) + 1 < grid.count(a) && grid.step(a) > 0.0) {
        const double d = euclid_diff(extra.value(node), extra.value(node + grid.stride(a)));
        rep.lipschitz_extra = std::max(rep.lipschitz_extra, d / grid.step(a));
      }
    }
  }
  rep.adjoin_ok = rep.e_adjoined - rep.e_family <= rep.lipschitz_extra * rep.step + 1e-12;
  rep.monotone_ok = rep.e_adjoined >= rep.e_family;

  const std::size_t count = std::min<std::size_t>(fam.members.size(), 20);
  const double lambdas[] = {0.25, 0.5, 0.75};
  rep.worst_combination = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      for (double lambda : lambdas) {
        GridFunction c(grid, extra.components());
        for (std::size_t t = 0; t < c.data().size(); ++t) {
          c.data()[t] = lambda * fam.members[i].data()[t] + (1.0 - lambda) * fam.members[j].data()[t];
        }
        rep.worst_combination = std::max(rep.worst_combination, equicontinuity_modulus(FunctionFamily{{c}}));
      }
    }
  }
  rep.convex_ok = rep.worst_combination <= rep.e_family + 1e-12;
  rep.pass = rep.adjoin_ok && rep.monotone_ok && rep.convex_ok;
  return rep;
}

}  // namespace volterra
