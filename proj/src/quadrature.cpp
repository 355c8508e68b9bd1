#include "volterra/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "volterra/error.hpp"

namespace volterra {

std::vector<CellPiece> axis_cells(const GridDesc& grid, std::size_t axis, double a, double b, double tol) {
  const double lo = grid.lower(axis);
  const double hi = grid.upper(axis);
  if (!(b > a)) return {};
  if (a < lo - tol || b > hi + tol) {
    throw GridCoverage("interval [" + format_shortest(a) + ", " + format_shortest(b) + "] leaves grid axis " +
                       std::to_string(axis + 1) + " [" + format_shortest(lo) + ", " + format_shortest(hi) + "]");
  }
  a = std::max(a, lo);
  b = std::min(b, hi);
  const std::size_t cells = grid.count(axis) - 1;
  if (!(b > a) || cells == 0) return {};
  const double h = grid.step(axis);
  const double pa = (a - lo) / h;
  const double pb = (b - lo) / h;
  const auto ca = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(pa))), cells - 1);
  const auto cb = std::min(static_cast<std::size_t>(std::max(0.0, std::ceil(pb) - 1.0)), cells - 1);
  std::vector<CellPiece> out;
  for (std::size_t c = ca; c <= cb; ++c) {
    const double alpha = std::clamp(pa - static_cast<double>(c), 0.0, 1.0);
    const double beta = std::clamp(pb - static_cast<double>(c), 0.0, 1.0);
    if (beta > alpha) out.push_back({c, alpha, beta});
  }
  return out;
}

AxisWeights axis_weights(const GridDesc& grid, std::size_t axis, double a, double b, double tol) {
  const std::vector<CellPiece> pieces = axis_cells(grid, axis, a, b, tol);
  AxisWeights aw;
  if (pieces.empty()) return aw;
  const double h = grid.step(axis);
  aw.first = pieces.front().cell;
  aw.w.assign(pieces.back().cell - aw.first + 2, 0.0);
  for (const CellPiece& p : pieces) {
    const double upper = 0.5 * (p.beta * p.beta - p.alpha * p.alpha);
    const std::size_t j = p.cell - aw.first;
    aw.w[j] += h * ((p.beta - p.alpha) - upper);
    aw.w[j + 1] += h * upper;
  }
  return aw;
}

BoxWeights box_weights(const GridDesc& grid, const Box& box, double tol) {
  BoxWeights bw;
  if (box.dim() != grid.dim()) throw GridMismatch("box and grid differ in dimension");
  if (box.empty()) return bw;
  bw.axes.reserve(grid.dim());
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    AxisWeights aw = axis_weights(grid, a, box.lower[a], box.upper[a], tol);
    if (aw.w.empty()) {
      bw.axes.clear();
      return bw;
    }
    bw.axes.push_back(std::move(aw));
  }
  bw.empty = false;
  return bw;
}

}  // namespace volterra
