#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "volterra/builtin_configs.hpp"
#include "volterra/config.hpp"
#include "volterra/convex.hpp"
#include "volterra/grid.hpp"
#include "volterra/problem.hpp"
#include "volterra/solver.hpp"
#include "volterra/weights.hpp"

namespace fixtures {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline volterra::ProblemSpec spec_from(std::string_view text,
                                       const std::vector<std::pair<std::string, std::string>>& solve = {}) {
  volterra::Config cfg = volterra::Config::parse(text);
  for (const auto& [k, v] : solve) cfg.set("solve", k, {v});
  return volterra::make_spec(cfg);
}

/// u = 1 + int_0^x u, exact e^x.
inline volterra::ProblemSpec second_kind(int n = 3, double h = 1.0 / 256.0) {
  return spec_from(volterra::builtin::second_kind, {{"n", std::to_string(n)}, {"h", volterra::format_shortest(h)}});
}

/// Example with Lambda(t) = (sin t, |t|), kernel e^{t^2}, F = cos u + 2, lambda = 2.
inline volterra::ProblemSpec nonlinear(int n = 1, double h = 1.0 / 256.0) {
  return spec_from(volterra::builtin::nonlinear, {{"n", std::to_string(n)}, {"h", volterra::format_shortest(h)}});
}

inline volterra::GridFunction random_function(const volterra::GridDesc& grid, std::size_t m, Rng& rng, double lo,
                                              double hi) {
  volterra::GridFunction u(grid, m);
  for (double& v : u.data()) v = uniform(rng, lo, hi);
  return u;
}

/// Values f(x) at the nodes of `grid`, scalar.
template <typename F>
volterra::GridFunction sample(const volterra::GridDesc& grid, F&& f) {
  volterra::GridFunction u(grid, 1);
  std::vector<double> x(grid.dim());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.point(node, x);
    u.at(node) = f(x);
  }
  return u;
}

inline double max_abs_diff(const volterra::GridFunction& a, const volterra::GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

inline double cross(const volterra::Point& o, const volterra::Point& a, const volterra::Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Counterclockwise hull of random points, collinear points dropped.
inline volterra::Polygon random_polygon(Rng& rng, double spread = 2.0) {
  for (;;) {
    const int count = std::uniform_int_distribution<int>(3, 12)(rng);
    const double cx = uniform(rng, -3.0, 3.0);
    const double cy = uniform(rng, -3.0, 3.0);
    std::vector<volterra::Point> pts;
    for (int i = 0; i < count; ++i) pts.push_back({cx + uniform(rng, -spread, spread), cy + uniform(rng, -spread, spread)});
    std::sort(pts.begin(), pts.end());
    std::vector<volterra::Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-9) --k;
      hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
      while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 1e-9) --k;
      hull[k++] = pts[i - 1];
    }
    hull.resize(k - 1);
    if (hull.size() >= 3) return volterra::Polygon{hull};
  }
}

inline volterra::ConvexSet random_set(Rng& rng) {
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: {
      const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
      volterra::Point p(m);
      for (double& v : p) v = uniform(rng, -5.0, 5.0);
      return volterra::ConvexSet(volterra::Singleton{p});
    }
    case 1: {
      const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
      volterra::Point lo(m);
      volterra::Point hi(m);
      for (std::size_t i = 0; i < m; ++i) {
        lo[i] = uniform(rng, -5.0, 5.0);
        hi[i] = lo[i] + uniform(rng, 0.0, 3.0);
      }
      return volterra::ConvexSet(volterra::IntervalBox{lo, hi});
    }
    case 2: {
      const std::size_t m = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
      volterra::Point c(m);
      for (double& v : c) v = uniform(rng, -5.0, 5.0);
      return volterra::ConvexSet(volterra::Ball{c, uniform(rng, 0.0, 3.0)});
    }
    default:
      return volterra::ConvexSet(random_polygon(rng));
  }
}

/// Scalar piecewise-linear function in x1 through random values at random breakpoints.
inline volterra::GridFunction random_pl(const volterra::GridDesc& grid, Rng& rng, double amplitude, int pieces) {
  std::vector<double> knots{grid.lower(0), grid.upper(0)};
  for (int i = 1; i < pieces; ++i) knots.push_back(uniform(rng, grid.lower(0), grid.upper(0)));
  std::sort(knots.begin(), knots.end());
  std::vector<double> vals;
  for (std::size_t i = 0; i < knots.size(); ++i) vals.push_back(uniform(rng, -amplitude, amplitude));
  return sample(grid, [&](const std::vector<double>& x) {
    const auto it = std::upper_bound(knots.begin(), knots.end(), x[0]);
    const std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - knots.begin(), 1), knots.size() - 1);
    const double t = knots[j] > knots[j - 1] ? (x[0] - knots[j - 1]) / (knots[j] - knots[j - 1]) : 0.0;
    return vals[j - 1] + t * (vals[j] - vals[j - 1]);
  });
}

/// Members scaled into the invariant set {|u|_{L_n} <= a_n} of `row`.
inline volterra::FunctionFamily random_family(const volterra::ProblemSpec& spec, const volterra::ScheduleRow& row,
                                              Rng& rng, int members) {
  volterra::FunctionFamily fam;
  const volterra::GridDesc grid = spec.grid();
  while (static_cast<int>(fam.members.size()) < members) {
    volterra::GridFunction f = random_pl(grid, rng, row.a, 6);
    const double norm = volterra::bielecki_norm(f, row.L, spec.domain.tau);
    if (norm > row.a) {
      for (double& v : f.data()) v *= row.a / norm;
    }
    fam.members.push_back(std::move(f));
  }
  return fam;
}

}  // namespace fixtures
