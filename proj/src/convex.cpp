#include "volterra/convex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "volterra/error.hpp"

namespace volterra {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(const Point& a, const Point& b) { return a[0] * b[1] - a[1] * b[0]; }

Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double segment_distance(std::span<const double> p, const Point& a, const Point& b) {
  const double ex = b[0] - a[0];
  const double ey = b[1] - a[1];
  const double len2 = ex * ex + ey * ey;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p[0] - (a[0] + t * ex);
  const double dy = p[1] - (a[1] + t * ey);
  return std::hypot(dx, dy);
}

/// Exterior turning angle at each vertex of a counterclockwise polygon.
std::vector<double> exterior_angles(const Polygon& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point in = sub(v[i], v[(i + n - 1) % n]);
    const Point out = sub(v[(i + 1) % n], v[i]);
    alpha[i] = std::atan2(cross(in, out), in[0] * out[0] + in[1] * out[1]);
  }
  return alpha;
}

void validate(const ConvexSet::Variant& shape) {
  std::visit(overloaded{
                 [](const Singleton& s) {
                   if (s.point.empty()) throw InvalidSet("singleton without coordinates");
                 },
                 [](const IntervalBox& b) {
                   if (b.lower.empty() || b.lower.size() != b.upper.size()) {
                     throw InvalidSet("interval box bounds differ in dimension");
                   }
                   for (std::size_t i = 0; i < b.lower.size(); ++i) {
                     if (!(b.lower[i] <= b.upper[i])) throw InvalidSet("interval box with lower > upper");
                   }
                 },
                 [](const Ball& b) {
                   if (b.center.empty()) throw InvalidSet("ball without center");
                   if (!(b.radius >= 0.0) || !std::isfinite(b.radius)) throw InvalidSet("ball radius must be >= 0");
                 },
                 [](const Polygon& p) {
                   const auto& v = p.vertices;
                   if (v.size() < 3) throw InvalidSet("polygon needs at least 3 vertices");
                   double scale = 0.0;
                   for (const auto& q : v) {
                     if (q.size() != 2) throw InvalidSet("polygon vertices must be planar");
                     scale = std::max({scale, std::fabs(q[0]), std::fabs(q[1])});
                   }
                   const std::size_t n = v.size();
                   for (std::size_t i = 0; i < n; ++i) {
                     const Point e0 = sub(v[(i + 1) % n], v[i]);
                     const Point e1 = sub(v[(i + 2) % n], v[(i + 1) % n]);
                     if (std::hypot(e0[0], e0[1]) <= 1e-14 * std::max(1.0, scale)) {
                       throw InvalidSet("polygon has repeated consecutive vertices");
                     }
                     if (cross(e0, e1) < -1e-12 * std::max(1.0, scale * scale)) {
                       throw InvalidSet("polygon is not convex and counterclockwise");
                     }
                   }
                   double turning = 0.0;
                   for (double a : exterior_angles(p)) turning += a;
                   if (std::fabs(turning - 2.0 * std::numbers::pi) > 1e-9) {
                     throw InvalidSet("polygon is self-intersecting (total turning is not 2*pi)");
                   }
                 },
             },
             shape);
}

std::vector<Point> box_vertices(const IntervalBox& b) {
  const std::size_t m = b.lower.size();
  std::vector<Point> out;
  out.reserve(std::size_t{1} << m);
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    Point p(m);
    for (std::size_t i = 0; i < m; ++i) p[i] = (mask >> i) & 1 ? b.upper[i] : b.lower[i];
    out.push_back(std::move(p));
  }
  return out;
}

/// One-dimensional balls are intervals; normalise so vertex formulas apply.
ConvexSet normalise(const ConvexSet& s) {
  if (const auto* b = std::get_if<Ball>(&s.shape()); b && b->center.size() == 1) {
    return ConvexSet(IntervalBox{{b->center[0] - b->radius}, {b->center[0] + b->radius}});
  }
  return s;
}

std::vector<Point> direction_net(std::size_t dim, std::size_t count) {
  std::vector<Point> dirs;
  dirs.reserve(count);
  if (dim == 1) return {{1.0}, {-1.0}};
  if (dim == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      dirs.push_back({std::cos(t), std::sin(t)});
    }
    return dirs;
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  for (std::size_t k = 0; k < count; ++k) {
    Point d(dim);
    double n = 0.0;
    while (n < 1e-8) {
      for (auto& c : d) c = gauss(rng);
      n = norm(d);
    }
    for (auto& c : d) c /= n;
    dirs.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < dim; ++i) {
    Point e(dim, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
    e[i] = -1.0;
    dirs.push_back(e);
  }
  return dirs;
}

double support_unchecked(const ConvexSet& s, std::span<const double> d) {
  return std::visit(overloaded{
                        [&](const Singleton& p) {
                          double v = 0.0;
                          for (std::size_t i = 0; i < d.size(); ++i) v += d[i] * p.point[i];
                          return v;
                        },
                        [&](const IntervalBox& b) {
                          double v = 0.0;
                          for (std::size_t i = 0; i < d.size(); ++i) v += std::max(d[i] * b.lower[i], d[i] * b.upper[i]);
                          return v;
                        },
                        [&](const Ball& b) {
                          double v = 0.0;
                          for (std::size_t i = 0; i < d.size(); ++i) v += d[i] * b.center[i];
                          return v + b.radius * norm(d);
                        },
                        [&](const Polygon& p) {
                          double best = -std::numeric_limits<double>::infinity();
                          for (const auto& q : p.vertices) best = std::max(best, d[0] * q[0] + d[1] * q[1]);
                          return best;
                        },
                    },
                    s.shape());
}

double directed_vertex_distance(const ConvexSet& from, const ConvexSet& to) {
  double h = 0.0;
  for (const auto& v : from.vertices()) h = std::max(h, to.distance(v));
  return h;
}

}  // namespace

ConvexSet::ConvexSet(Variant v) : shape_(std::move(v)) { validate(shape_); }

std::size_t ConvexSet::dim() const {
  return std::visit(overloaded{
                        [](const Singleton& s) { return s.point.size(); },
                        [](const IntervalBox& b) { return b.lower.size(); },
                        [](const Ball& b) { return b.center.size(); },
                        [](const Polygon&) { return std::size_t{2}; },
                    },
                    shape_);
}

std::vector<Point> ConvexSet::vertices() const {
  return std::visit(overloaded{
                        [](const Singleton& s) { return std::vector<Point>{s.point}; },
                        [](const IntervalBox& b) { return box_vertices(b); },
                        [](const Ball&) { return std::vector<Point>{}; },
                        [](const Polygon& p) { return p.vertices; },
                    },
                    shape_);
}

double ConvexSet::distance(std::span<const double> p) const {
  return std::visit(overloaded{
                        [&](const Singleton& s) {
                          double d2 = 0.0;
                          for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - s.point[i]) * (p[i] - s.point[i]);
                          return std::sqrt(d2);
                        },
                        [&](const IntervalBox& b) {
                          double d2 = 0.0;
                          for (std::size_t i = 0; i < p.size(); ++i) {
                            const double c = std::clamp(p[i], b.lower[i], b.upper[i]);
                            d2 += (p[i] - c) * (p[i] - c);
                          }
                          return std::sqrt(d2);
                        },
                        [&](const Ball& b) {
                          double d2 = 0.0;
                          for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - b.center[i]) * (p[i] - b.center[i]);
                          return std::max(0.0, std::sqrt(d2) - b.radius);
                        },
                        [&](const Polygon& poly) {
                          const auto& v = poly.vertices;
                          const std::size_t n = v.size();
                          bool inside = true;
                          double best = std::numeric_limits<double>::infinity();
                          for (std::size_t i = 0; i < n; ++i) {
                            const Point& a = v[i];
                            const Point& b = v[(i + 1) % n];
                            const double side = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                            if (side < 0.0) inside = false;
                            best = std::min(best, segment_distance(p, a, b));
                          }
                          return inside ? 0.0 : best;
                        },
                    },
                    shape_);
}

bool ConvexSet::contains(std::span<const double> p, double tol) const { return distance(p) <= tol; }

ConvexSet ConvexSet::translated(std::span<const double> v) const {
  auto shift = [&](Point p) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += v[i];
    return p;
  };
  return std::visit(overloaded{
                        [&](const Singleton& s) { return ConvexSet(Singleton{shift(s.point)}); },
                        [&](const IntervalBox& b) { return ConvexSet(IntervalBox{shift(b.lower), shift(b.upper)}); },
                        [&](const Ball& b) { return ConvexSet(Ball{shift(b.center), b.radius}); },
                        [&](const Polygon& p) {
                          Polygon q;
                          for (const auto& vert : p.vertices) q.vertices.push_back(shift(vert));
                          return ConvexSet(std::move(q));
                        },
                    },
                    shape_);
}

Point steiner(const ConvexSet& s) {
  return std::visit(overloaded{
                        [](const Singleton& p) { return p.point; },
                        [](const IntervalBox& b) {
                          Point m(b.lower.size());
                          for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (b.lower[i] + b.upper[i]);
                          return m;
                        },
                        [](const Ball& b) { return b.center; },
                        [](const Polygon& p) {
                          const std::vector<double> alpha = exterior_angles(p);
                          double total = 0.0;
                          Point s{0.0, 0.0};
                          for (std::size_t i = 0; i < alpha.size(); ++i) {
                            total += alpha[i];
                            s[0] += alpha[i] * p.vertices[i][0];
                            s[1] += alpha[i] * p.vertices[i][1];
                          }
                          s[0] /= total;
                          s[1] /= total;
                          return s;
                        },
                    },
                    s.shape());
}

double support(const ConvexSet& s, std::span<const double> d) {
  if (d.size() != s.dim()) throw InvalidDirection("direction has the wrong dimension");
  if (std::fabs(norm(d) - 1.0) > 1e-12) throw InvalidDirection("direction is not a unit vector");
  return support_unchecked(s, d);
}

double hausdorff_support_net(const ConvexSet& a, const ConvexSet& b, std::size_t directions) {
  if (a.dim() != b.dim()) throw InvalidSet("hausdorff distance between sets of different dimension");
  double h = 0.0;
  for (const auto& d : direction_net(a.dim(), directions)) {
    h = std::max(h, std::fabs(support_unchecked(a, d) - support_unchecked(b, d)));
  }
  return h;
}

double hausdorff(const ConvexSet& a_in, const ConvexSet& b_in) {
  if (a_in.dim() != b_in.dim()) throw InvalidSet("hausdorff distance between sets of different dimension");
  const ConvexSet a = normalise(a_in);
  const ConvexSet b = normalise(b_in);
  const auto* ball_a = std::get_if<Ball>(&a.shape());
  const auto* ball_b = std::get_if<Ball>(&b.shape());
  if (ball_a && ball_b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < ball_a->center.size(); ++i) {
      d2 += (ball_a->center[i] - ball_b->center[i]) * (ball_a->center[i] - ball_b->center[i]);
    }
    return std::sqrt(d2) + std::fabs(ball_a->radius - ball_b->radius);
  }
  if (!ball_a && !ball_b) return std::max(directed_vertex_distance(a, b), directed_vertex_distance(b, a));
  // Ball against a polytope: the polytope side is exact, the ball side uses the net.
  const ConvexSet& poly = ball_a ? b : a;
  const ConvexSet& ball = ball_a ? a : b;
  return std::max(directed_vertex_distance(poly, ball), hausdorff_support_net(poly, ball));
}

double steiner_lipschitz_constant(std::size_t dim) {
  const double m = static_cast<double>(dim);
  return 2.0 * std::exp(std::lgamma(m / 2.0 + 1.0) - std::lgamma((m + 1.0) / 2.0)) / std::sqrt(std::numbers::pi);
}

}  // namespace volterra
