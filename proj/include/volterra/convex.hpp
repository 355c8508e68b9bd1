#pragma once

// Convex compact values of multimaps in R^M and the Steiner point selection.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace volterra {

using Point = std::vector<double>;

struct Singleton {
  Point point;
};

/// Componentwise interval [lower_i, upper_i]; M = 1 is a plain interval.
struct IntervalBox {
  Point lower;
  Point upper;
};

struct Ball {
  Point center;
  double radius = 0.0;
};

/// Convex polygon in R^2, vertices counterclockwise.
struct Polygon {
  std::vector<Point> vertices;
};

class ConvexSet {
 public:
  using Variant = std::variant<Singleton, IntervalBox, Ball, Polygon>;

  /// Throws InvalidSet when the variant violates its invariants.
  explicit ConvexSet(Variant v);

  static ConvexSet interval(double a, double b) { return ConvexSet(IntervalBox{{a}, {b}}); }

  const Variant& shape() const { return shape_; }
  std::size_t dim() const;

  /// Vertex list for Singleton/IntervalBox/Polygon; empty for Ball.
  std::vector<Point> vertices() const;
  double distance(std::span<const double> p) const;
  bool contains(std::span<const double> p, double tol) const;

  ConvexSet translated(std::span<const double> v) const;

 private:
  Variant shape_;
};

Point steiner(const ConvexSet& s);

/// sup over y in s of <d, y>; d must be a unit vector within 1e-12.
double support(const ConvexSet& s, std::span<const double> d);

/// Hausdorff distance. Exact for pairs involving at least one vertex-described
/// set and for ball pairs; other pairs use a direction net.
double hausdorff(const ConvexSet& a, const ConvexSet& b);

/// Max over `directions` unit vectors of |support(a,d) - support(b,d)|.
double hausdorff_support_net(const ConvexSet& a, const ConvexSet& b, std::size_t directions = 4096);

/// 2 Gamma(M/2 + 1) / (sqrt(pi) Gamma((M+1)/2)).
double steiner_lipschitz_constant(std::size_t dim);

}  // namespace volterra
