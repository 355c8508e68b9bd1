#include "volterra/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "volterra/error.hpp"
#include "volterra/operators.hpp"

namespace volterra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kLadderTop = 20;
constexpr int kBisections = 20;
constexpr double kSeed = 0.5;

double eval1(const CompiledExpr& f, double x) { return f(std::span<const double>(&x, 1)); }

/// Largest t with f(t) <= d for a nondecreasing f; +inf if f stays below d.
double inverse_modulus(const CompiledExpr& f, double d) {
  if (!(d > 0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  if (eval1(f, hi) <= d) {
    while (eval1(f, 2.0 * hi) <= d) {
      hi *= 2.0;
      if (hi > 1e300) return kInf;
    }
    lo = hi;
    hi *= 2.0;
  } else {
    double t = 1.0;
    while (eval1(f, t) > d) {
      t *= 0.5;
      if (t < 1e-300) return 0.0;
    }
    lo = t;
    hi = 2.0 * t;
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (eval1(f, mid) <= d ? lo : hi) = mid;
  }
  return lo;
}

double sup_ratio(const CompiledExpr& phi, double r) {
  const double hi = std::min(r, 1e300);
  const double lo = std::min(hi, 1e-9);
  const int count = 4000;
  double best = 0.0;
  for (int i = 0; i < count; ++i) {
    const double x = i + 1 == count ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    if (x > 0.0) best = std::max(best, eval1(phi, x) / x);
  }
  return best;
}

double grid_max(const GridDesc& grid, const std::function<double(std::span<const double>)>& f) {
  std::vector<double> x(grid.dim());
  double best = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.point(node, x);
    best = std::max(best, f(x));
  }
  return best;
}

}  // namespace

PhiEvaluator::PhiEvaluator(const Domain& d, const GridDesc& grid, const Expr& zeta, double tol)
    : tables_(make_phi_tables(d, grid, zeta, tol)) {}

double phi(double L, const Expr& zeta, int n, const Domain& d, double h) {
  return PhiEvaluator(d, d.grid(n, h), zeta)(L);
}

double select_L(double target, const PhiEvaluator& phi) {
  if (target == kInf) return 1.0;
  if (!(target > 0.0)) throw WeightSelectionFailed("weight target " + format_shortest(target) + " is not positive");
  double prev = 0.0;
  for (int k = 0; k <= kLadderTop; ++k) {
    const double L = std::ldexp(1.0, k);
    if (phi(L) <= target) {
      if (k == 0) return L;
      double lo = prev;
      double hi = L;
      for (int i = 0; i < kBisections; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) <= target ? hi : lo) = mid;
      }
      return hi;
    }
    prev = L;
  }
  throw WeightSelectionFailed("Phi stays above " + format_shortest(target) + " up to L = 2^20 (Phi = " +
                              format_shortest(phi(std::ldexp(1.0, kLadderTop))) + "); is tau admissible?");
}

double select_L(double target, const Expr& zeta, int n, const Domain& d, double h) {
  return select_L(target, PhiEvaluator(d, d.grid(n, h), zeta));
}

BoundaryConditionReport check_boundary_condition(std::span<const double> g_norm, const Expr& phi_fun, std::span<const double> a, int n_max) {
  if (n_max < 1 || g_norm.size() < static_cast<std::size_t>(n_max) || a.size() < static_cast<std::size_t>(n_max)) {
    throw LengthMismatch("boundary check needs g norms and a_n for n = 1 .. n_max");
  }
  const CompiledExpr phi(phi_fun, modulus_scope());
  BoundaryConditionReport rep;
  for (int n = 1; n <= n_max; ++n) rep.d.push_back(a[n - 1] - eval1(phi, a[n - 1]) - g_norm[n - 1]);
  rep.window_lo = std::max(1, n_max / 2);
  rep.window_hi = n_max;
  rep.window_min = kInf;
  rep.nondecreasing = true;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (int n = rep.window_lo; n <= n_max; ++n) {
    const double v = rep.d[n - 1];
    rep.window_min = std::min(rep.window_min, std::isnan(v) ? -kInf : v);
    if (n > rep.window_lo && v < rep.d[n - 2]) rep.nondecreasing = false;
    sx += n;
    sy += v;
    sxx += static_cast<double>(n) * n;
    sxy += n * v;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  rep.slope = denom > 0.0 ? (count * sxy - sx * sy) / denom : 0.0;
  const double fit_start = count > 0 ? (sy - rep.slope * sx) / count + rep.slope * rep.window_lo : 0.0;
  const bool bounded_fit = rep.slope >= 0.0 && fit_start > 0.0;
  rep.pass = rep.window_min > 0.0 && (rep.nondecreasing || bounded_fit);
  std::ostringstream msg;
  msg << "window [" << rep.window_lo << ", " << rep.window_hi << "]: min d_n = " << format_shortest(rep.window_min)
      << (rep.nondecreasing ? ", nondecreasing" : ", not monotone") << ", fitted slope " << format_shortest(rep.slope);
  rep.message = msg.str();
  return rep;
}

bool WeightSchedule::has(int n) const { return n >= N && static_cast<std::size_t>(n - N) < rows.size(); }

const ScheduleRow& WeightSchedule::at(int n) const {
  if (!has(n)) throw Error("weight schedule has no row for n = " + std::to_string(n));
  return rows[static_cast<std::size_t>(n - N)];
}

std::vector<double> boundary_offsets(const ProblemSpec& spec, int n_max) {
  spec.validate();
  const std::size_t N = spec.dim();
  const std::size_t m = spec.components;
  const Scope scope = outer_scope(spec.outer.form, N, m);
  std::vector<CompiledExpr> parts;
  std::vector<CompiledExpr> lower;
  std::vector<CompiledExpr> upper;
  for (const Expr& e : spec.outer.g) parts.emplace_back(e, scope);
  for (const Expr& e : spec.outer.G_lower) lower.emplace_back(e, scope);
  for (const Expr& e : spec.outer.G_upper) upper.emplace_back(e, scope);
  const std::size_t arity = N + (spec.outer.form == Form::composite ? 2 : m);

  std::vector<double> out;
  for (int n = 1; n <= n_max; ++n) {
    GridDesc grid;
    try {
      grid = spec.domain.grid(n, spec.weight_step());
    } catch (const Error&) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    out.push_back(grid_max(grid, [&](std::span<const double> x) {
      std::vector<double> args(arity, 0.0);
      std::copy(x.begin(), x.end(), args.begin());
      double s = 0.0;
      if (spec.outer.form == Form::set_valued) {
        for (std::size_t i = 0; i < m; ++i) {
          const double big = std::max(std::fabs(lower[i](args)), std::fabs(upper[i](args)));
          s += big * big;
        }
      } else {
        for (const auto& g : parts) s += g(args) * g(args);
      }
      return std::sqrt(s);
    }));
  }
  return out;
}

namespace {

std::vector<double> margins(const ProblemSpec& spec, std::span<const double> offsets, std::span<const double> a) {
  const CompiledExpr phi(spec.outer.phi, modulus_scope());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double phi_a = spec.outer.form == Form::set_valued ? 0.0 : eval1(phi, a[i]);
    d[i] = a[i] - phi_a - offsets[i];
  }
  return d;
}

}  // namespace

std::vector<double> default_a_sequence(const ProblemSpec& spec, int n_max) {
  std::vector<double> a(static_cast<std::size_t>(n_max));
  if (spec.a_n) {
    const CompiledExpr f(*spec.a_n, Scope({"n"}));
    for (int n = 1; n <= n_max; ++n) a[n - 1] = eval1(f, n);
    return a;
  }
  const std::vector<double> offsets = boundary_offsets(spec, n_max);
  for (int k = 0; k <= 20; ++k) {
    const double c = std::ldexp(1.0, k);
    for (int n = 1; n <= n_max; ++n) a[n - 1] = c * n;
    const std::vector<double> d = margins(spec, offsets, a);
    bool ok = true;
    for (double v : d) ok = ok && (v > 0.0 || std::isnan(v));
    if (ok) return a;
  }
  for (int n = 1; n <= n_max; ++n) a[n - 1] = n;
  return a;
}

WeightSchedule build_schedule(const ProblemSpec& spec, std::span<const double> a, int n_max) {
  if (a.size() < static_cast<std::size_t>(n_max)) throw LengthMismatch("a_n must be given for n = 1 .. n_max");
  const std::vector<double> offsets = boundary_offsets(spec, n_max);
  const std::vector<double> d = margins(spec, offsets, a.first(static_cast<std::size_t>(n_max)));

  int N = n_max + 1;
  for (int n = n_max; n >= 1 && d[n - 1] > 0.0; --n) N = n;
  if (N > n_max) {
    throw BoundaryConditionFailed("a_n - phi(a_n) - |g(., 0)|_n = " + format_shortest(d[n_max - 1]) +
                                  " is not positive at n = " + std::to_string(n_max));
  }

  const Domain& dom = spec.domain;
  const Kernel kernel(spec.kernel, spec.dim(), spec.components);
  const CompiledExpr phi_fun(spec.outer.phi, modulus_scope());
  const CompiledExpr vartheta(spec.outer.vartheta.value_or(Expr()), modulus_scope());

  WeightSchedule sched;
  sched.N = N;
  std::vector<PhiEvaluator> phi_b;
  std::vector<PhiEvaluator> phi_eta;
  for (int n = N; n <= n_max; ++n) {
    const GridDesc grid = dom.grid(n, spec.weight_step());
    ScheduleRow row;
    row.n = n;
    row.a = a[n - 1];
    row.margin = d[n - 1];
    row.sup_K = sup_kernel_norm(kernel, dom.region, grid, spec.tol.geom);
    row.sup_tau = grid_max(grid, [&](std::span<const double> x) { return dom.tau(x); });
    phi_b.emplace_back(dom, grid, spec.F.b, spec.tol.geom);
    phi_eta.emplace_back(dom, grid, spec.F.eta, spec.tol.geom);

    double allowed = row.margin;
    if (spec.outer.form == Form::composite) allowed = inverse_modulus(vartheta, row.margin);
    if (spec.outer.form == Form::set_valued) allowed = inverse_modulus(phi_fun, row.margin);
    const double target = row.sup_K > 0.0 ? allowed / (row.sup_K * (1.0 + row.a)) : kInf;
    row.L = select_L(target, phi_b.back());
    if (!sched.rows.empty()) row.L = std::max(row.L, sched.rows.back().L);
    row.phi_b = phi_b.back()(row.L);
    if (row.phi_b > target) {
      throw WeightSelectionFailed("Phi(L, b) is not monotone in L at n = " + std::to_string(n));
    }
    row.r = std::exp(row.L * row.sup_tau) * row.a;
    row.k_upper = 1.0 - sup_ratio(phi_fun, row.r);
    if (!(row.k_upper > 0.0)) {
      throw WeightSelectionFailed("phi(x) reaches x on (0, r_n] at n = " + std::to_string(n) +
                                  "; no k_n keeps psi_n(x) < x");
    }
    const double hat_target = row.sup_K > 0.0 ? kSeed * row.k_upper / (4.0 * row.sup_K) : kInf;
    row.Lhat = select_L(hat_target, phi_eta.back());
    if (!sched.rows.empty()) row.Lhat = std::max(row.Lhat, sched.rows.back().Lhat);
    row.phi_eta = phi_eta.back()(row.Lhat);
    const double lower = 4.0 * row.sup_K * row.phi_eta;
    if (!(lower < row.k_upper)) {
      throw WeightSelectionFailed("Phi(Lhat, eta) is not monotone in L at n = " + std::to_string(n));
    }
    row.k = 0.5 * (lower + row.k_upper);
    sched.rows.push_back(row);
  }
  return sched;
}

WeightSchedule build_schedule(const ProblemSpec& spec, int n_max) {
  const std::vector<double> a = default_a_sequence(spec, n_max);
  return build_schedule(spec, a, n_max);
}

double bielecki_norm(const GridFunction& u, double L, const TauMap& tau) {
  const GridDesc& grid = u.grid();
  std::vector<double> x(grid.dim());
  double best = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.point(node, x);
    best = std::max(best, std::exp(-L * tau(x)) * u.magnitude(node));
  }
  return best;
}

double sup_norm(const GridFunction& u) {
  double best = 0.0;
  for (std::size_t node = 0; node < u.size(); ++node) best = std::max(best, u.magnitude(node));
  return best;
}

double psi(int n, double x, const WeightSchedule& sched, const Expr& phi_fun) {
  const CompiledExpr phi(phi_fun, modulus_scope());
  return eval1(phi, x) + sched.at(n).k * x;
}

void write_schedule_csv(std::ostream& out, const WeightSchedule& s) {
  out << "n,L_n,Lhat_n,a_n,k_n,r_n,phi_b,phi_eta\n";
  for (const ScheduleRow& r : s.rows) {
    out << r.n << ',' << format_g17(r.L) << ',' << format_g17(r.Lhat) << ',' << format_g17(r.a) << ','
        << format_g17(r.k) << ',' << format_g17(r.r) << ',' << format_g17(r.phi_b) << ',' << format_g17(r.phi_eta)
        << '\n';
  }
}

WeightSchedule read_schedule_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("n,L_n,Lhat_n,a_n,k_n,r_n,phi_b,phi_eta", 0) != 0) {
    throw Error("schedule CSV must start with the header n,L_n,Lhat_n,a_n,k_n,r_n,phi_b,phi_eta");
  }
  WeightSchedule s;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw Error("schedule CSV line " + std::to_string(lineno) + " needs 8 columns");
    ScheduleRow r;
    try {
      r.n = std::stoi(cells[0]);
      r.L = std::stod(cells[1]);
      r.Lhat = std::stod(cells[2]);
      r.a = std::stod(cells[3]);
      r.k = std::stod(cells[4]);
      r.r = std::stod(cells[5]);
      r.phi_b = std::stod(cells[6]);
      r.phi_eta = std::stod(cells[7]);
    } catch (const std::exception&) {
      throw Error("schedule CSV line " + std::to_string(lineno) + " has a malformed number");
    }
    if (!s.rows.empty() && r.n != s.rows.back().n + 1) {
      throw Error("schedule CSV line " + std::to_string(lineno) + " breaks the consecutive n sequence");
    }
    s.rows.push_back(r);
  }
  if (s.rows.empty()) throw Error("schedule CSV has no rows");
  s.N = s.rows.front().n;
  return s;
}

}  // namespace volterra
