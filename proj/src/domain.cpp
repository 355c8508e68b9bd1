#include "volterra/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "volterra/error.hpp"

namespace volterra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string bound_text(double v) { return v < 0 ? "(" + format_shortest(v) + ")" : format_shortest(v); }

/// Evenly spaced nodes of [lo, hi], both ends included.
std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

/// Visits every point of a tensor lattice; stops early when `visit` returns false.
template <typename Visit>
bool for_each_lattice_point(const std::vector<std::vector<double>>& axes, Visit&& visit) {
  const std::size_t n = axes.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> p(n);
  for (const auto& a : axes) {
    if (a.empty()) return true;
  }
  for (;;) {
    for (std::size_t d = 0; d < n; ++d) p[d] = axes[d][idx[d]];
    if (!visit(std::span<const double>(p))) return false;
    std::size_t d = n;
    while (d > 0) {
      --d;
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
      if (d == 0) return true;
    }
    if (n == 0) return true;
  }
}

}  // namespace

Scope point_scope(std::size_t dim) {
  Scope s;
  for (std::size_t i = 0; i < dim; ++i) s.add("x" + std::to_string(i + 1));
  if (dim == 1) {
    s.alias("x", 0);
    s.alias("t", 0);
  }
  return s;
}

Scope pair_scope(std::size_t dim) {
  Scope s;
  for (std::size_t i = 0; i < dim; ++i) s.add("x" + std::to_string(i + 1));
  for (std::size_t i = 0; i < dim; ++i) s.add("y" + std::to_string(i + 1));
  if (dim == 1) {
    s.alias("x", 0);
    s.alias("t", 0);
    s.alias("y", 1);
    s.alias("s", 1);
  }
  return s;
}

bool Box::empty() const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(lower[i] < upper[i])) return true;
  }
  return false;
}

double Box::measure() const {
  double m = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) m *= std::max(0.0, upper[i] - lower[i]);
  return m;
}

Box Box::intersect(const Box& other) const {
  Box out{lower, upper};
  for (std::size_t i = 0; i < dim(); ++i) {
    out.lower[i] = std::max(lower[i], other.lower[i]);
    out.upper[i] = std::min(upper[i], other.upper[i]);
  }
  return out;
}

bool Box::contains(const Box& inner, double tol) const {
  if (inner.empty()) return true;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (inner.lower[i] < lower[i] - tol || inner.upper[i] > upper[i] + tol) return false;
  }
  return true;
}

bool Box::contains_point(std::span<const double> x, double tol) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  }
  return true;
}

double Box::sup_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double m = std::max(std::fabs(lower[i]), std::fabs(upper[i]));
    s += m * m;
  }
  return std::sqrt(s);
}

double symmetric_difference_measure(const Box& a, const Box& b) {
  const double ma = a.empty() ? 0.0 : a.measure();
  const double mb = b.empty() ? 0.0 : b.measure();
  const Box c = a.intersect(b);
  const double mc = c.empty() ? 0.0 : c.measure();
  return std::max(0.0, ma + mb - 2.0 * mc);
}

Region::Region(std::vector<Expr> lower, std::vector<Expr> upper, Box omega)
    : lower_src_(std::move(lower)), upper_src_(std::move(upper)), omega_(std::move(omega)) {
  if (lower_src_.size() != upper_src_.size() || lower_src_.size() != omega_.dim()) {
    throw Error("region bounds must have one lower and one upper expression per dimension");
  }
  const Scope scope = point_scope(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    lower_.emplace_back(lower_src_[i], scope);
    upper_.emplace_back(upper_src_[i], scope);
  }
}

Box Region::raw(std::span<const double> x) const {
  Box b{std::vector<double>(dim()), std::vector<double>(dim())};
  for (std::size_t i = 0; i < dim(); ++i) {
    b.lower[i] = lower_[i](x);
    b.upper[i] = upper_[i](x);
  }
  return b;
}

Box Region::at(std::span<const double> x) const { return raw(x).intersect(omega_); }

double region_measure(const Region& r, std::span<const double> x) {
  const Box b = r.at(x);
  return b.empty() ? 0.0 : b.measure();
}

double rho(const Region& r, std::span<const double> x, std::span<const double> x2) {
  return symmetric_difference_measure(r.at(x), r.at(x2));
}

Exhaustion::Exhaustion(std::vector<Expr> lower, std::vector<Expr> upper, Box omega)
    : omega_(std::move(omega)) {
  if (lower.size() != upper.size() || lower.size() != omega_.dim()) {
    throw Error("exhaustion needs one lower and one upper expression per dimension");
  }
  const Scope scope({"n"});
  for (std::size_t i = 0; i < lower.size(); ++i) {
    lower_.emplace_back(lower[i], scope);
    upper_.emplace_back(upper[i], scope);
  }
}

Exhaustion Exhaustion::standard(const Box& omega) {
  std::vector<Expr> lower;
  std::vector<Expr> upper;
  for (std::size_t i = 0; i < omega.dim(); ++i) {
    const double lo = omega.lower[i];
    const double hi = omega.upper[i];
    lower.push_back(std::isfinite(lo) ? parse("max(" + bound_text(lo) + "+1/n,-n)") : parse("-n"));
    upper.push_back(std::isfinite(hi) ? parse("min(" + bound_text(hi) + "-1/n,n)") : parse("n"));
  }
  return Exhaustion(std::move(lower), std::move(upper), omega);
}

Box Exhaustion::member(int n) const {
  const double nn = static_cast<double>(n);
  const std::span<const double> arg(&nn, 1);
  Box b{std::vector<double>(dim()), std::vector<double>(dim())};
  for (std::size_t i = 0; i < dim(); ++i) {
    b.lower[i] = lower_[i](arg);
    b.upper[i] = upper_[i](arg);
  }
  return b.intersect(omega_);
}

std::optional<int> Exhaustion::first_nesting_violation(int n_max) const {
  for (int n = 1; n < n_max; ++n) {
    if (!member(n + 1).contains(member(n), 0.0)) return n + 1;
  }
  return std::nullopt;
}

std::optional<int> Exhaustion::first_covering(const Box& probe, int n_max) const {
  for (int n = 1; n <= n_max; ++n) {
    if (member(n).contains(probe, 0.0)) return n;
  }
  return std::nullopt;
}

TauMap::TauMap(Expr expr, std::size_t dim) : expr_(std::move(expr)), compiled_(expr_, point_scope(dim)) {}

GridDesc Domain::grid(int n, double h) const {
  const Box b = exhaustion.member(n);
  if (b.empty()) throw Error("exhaustion member Omega_" + std::to_string(n) + " is empty");
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (!std::isfinite(b.lower[i]) || !std::isfinite(b.upper[i])) {
      throw Error("exhaustion member Omega_" + std::to_string(n) + " is unbounded");
    }
  }
  if (!(h > 0.0)) throw Error("grid step must be positive");
  return GridDesc::with_step(b.lower, b.upper, h);
}

InvarianceReport check_lambda_invariance(const Exhaustion& e, const Region& r, int n,
                                         const GridDesc& samples, Tolerances tol) {
  if (n < 1) throw Error("exhaustion index must be >= 1");
  InvarianceReport report;
  const Box member = e.member(n);
  std::vector<double> x(samples.dim());
  for (std::size_t node = 0; node < samples.size(); ++node) {
    samples.point(node, x);
    if (!member.contains_point(x, 0.0)) continue;
    ++report.checked;
    const Box lam = r.at(x);
    if (lam.empty()) continue;
    double excess = 0.0;
    for (std::size_t i = 0; i < lam.dim(); ++i) {
      excess = std::max(excess, member.lower[i] - lam.lower[i]);
      excess = std::max(excess, lam.upper[i] - member.upper[i]);
    }
    if (excess > tol.geom && excess > report.worst_excess) {
      report.pass = false;
      report.worst_excess = excess;
      report.worst_point = x;
    }
  }
  return report;
}

AdmissibilityReport check_tau_admissible(const TauMap& tau, const Region& r,
                                         std::span<const TauProbe> probes, Tolerances tol) {
  AdmissibilityReport report;
  const std::size_t dim = r.dim();
  const std::size_t candidates = dim == 1 ? 41 : dim == 2 ? 21 : 7;
  const std::size_t samples = dim == 1 ? 65 : dim == 2 ? 17 : 7;
  const Box& omega = r.omega();

  for (const TauProbe& probe : probes) {
    TauProbeResult result;
    result.probe = probe;
    result.tau_x0 = tau(probe.x0);
    result.best_sup = kInf;
    const Box lam0 = r.at(probe.x0);

    std::vector<std::vector<double>> axes(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      axes[i] = linspace(probe.x0[i] - probe.delta, probe.x0[i] + probe.delta, candidates);
    }
    for_each_lattice_point(axes, [&](std::span<const double> x) {
      double dist2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        dist2 += (x[i] - probe.x0[i]) * (x[i] - probe.x0[i]);
        if (!(x[i] > omega.lower[i] && x[i] < omega.upper[i])) return true;
      }
      if (dist2 > probe.delta * probe.delta * (1.0 + 1e-12)) return true;

      const Box common = r.at(x).intersect(lam0);
      double sup = -kInf;
      if (!common.empty()) {
        std::vector<std::vector<double>> inner(dim);
        for (std::size_t i = 0; i < dim; ++i) inner[i] = linspace(common.lower[i], common.upper[i], samples);
        for_each_lattice_point(inner, [&](std::span<const double> y) {
          sup = std::max(sup, tau(y));
          return true;
        });
      }
      if (sup < result.best_sup) {
        result.best_sup = sup;
        result.witness.assign(x.begin(), x.end());
      }
      if (sup < result.tau_x0 - tol.strict) {
        result.pass = true;
        return false;
      }
      return true;
    });
    report.pass = report.pass && result.pass;
    report.probes.push_back(std::move(result));
  }
  return report;
}

std::vector<TauProbe> default_tau_probes(const Domain& domain, int n, double h) {
  const Box member = domain.exhaustion.member(n);
  std::vector<std::vector<double>> axes(domain.dim());
  double min_side = kInf;
  for (std::size_t i = 0; i < domain.dim(); ++i) {
    const double lo = member.lower[i];
    const double hi = member.upper[i];
    min_side = std::min(min_side, hi - lo);
    axes[i] = {lo + 0.25 * (hi - lo), lo + 0.5 * (hi - lo), lo + 0.75 * (hi - lo)};
  }
  const double delta = std::min(4.0 * h, 0.2 * min_side);
  std::vector<TauProbe> probes;
  for_each_lattice_point(axes, [&](std::span<const double> x) {
    probes.push_back({std::vector<double>(x.begin(), x.end()), delta});
    return true;
  });
  return probes;
}

}  // namespace volterra
