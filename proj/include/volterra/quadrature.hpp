#pragma once

// Integration of grid data over boxes: each axis contributes the exact
// integral of the piecewise-linear interpolant, including partial end cells.

#include <cstddef>
#include <span>
#include <vector>

#include "volterra/domain.hpp"
#include "volterra/grid.hpp"

namespace volterra {

/// Part of grid cell `cell` (between nodes cell and cell+1) covered by an
/// interval, in local coordinates 0 <= alpha < beta <= 1.
struct CellPiece {
  std::size_t cell = 0;
  double alpha = 0.0;
  double beta = 1.0;
};

/// Cells of one axis met by [a, b]. Throws GridCoverage when [a, b] leaves the
/// axis by more than `tol`; smaller overhangs are clipped.
std::vector<CellPiece> axis_cells(const GridDesc& grid, std::size_t axis, double a, double b, double tol);

/// Nonzero weights of nodes first .. first + w.size() - 1.
struct AxisWeights {
  std::size_t first = 0;
  std::vector<double> w;
};

AxisWeights axis_weights(const GridDesc& grid, std::size_t axis, double a, double b, double tol);

struct BoxWeights {
  bool empty = true;
  std::vector<AxisWeights> axes;
};

BoxWeights box_weights(const GridDesc& grid, const Box& box, double tol);

/// Calls visit(flat_index, weight) for every node in the tensor support, last
/// axis fastest. The order is fixed, so sums built from it are reproducible.
template <typename Visit>
void for_each_weight(const GridDesc& grid, const BoxWeights& bw, Visit&& visit) {
  if (bw.empty) return;
  const std::size_t n = bw.axes.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> partial(n + 1, 1.0);
  std::vector<std::size_t> base(n + 1, 0);
  std::size_t d = 0;
  for (;;) {
    // Fill prefix products from axis d downwards.
    for (std::size_t a = d; a < n; ++a) {
      const AxisWeights& aw = bw.axes[a];
      partial[a + 1] = partial[a] * aw.w[idx[a]];
      base[a + 1] = base[a] + (aw.first + idx[a]) * grid.stride(a);
    }
    visit(base[n], partial[n]);
    std::size_t a = n;
    while (a > 0) {
      --a;
      if (++idx[a] < bw.axes[a].w.size()) break;
      idx[a] = 0;
      if (a == 0) return;
    }
    d = a;
  }
}

/// Like for_each_weight, but hands over whole rows along the last axis:
/// visit(flat index of the row start, product of the other axes' weights, last-axis weights).
template <typename Visit>
void for_each_row(const GridDesc& grid, const BoxWeights& bw, Visit&& visit) {
  if (bw.empty) return;
  const std::size_t n = bw.axes.size();
  const AxisWeights& last = bw.axes[n - 1];
  std::vector<std::size_t> idx(n - 1, 0);
  for (;;) {
    double weight = 1.0;
    std::size_t base = last.first * grid.stride(n - 1);
    for (std::size_t a = 0; a + 1 < n; ++a) {
      weight *= bw.axes[a].w[idx[a]];
      base += (bw.axes[a].first + idx[a]) * grid.stride(a);
    }
    visit(base, weight, std::span<const double>(last.w));
    std::size_t a = n - 1;
    while (a > 0) {
      --a;
      if (++idx[a] < bw.axes[a].w.size()) break;
      idx[a] = 0;
      if (a == 0) return;
    }
    if (n == 1) return;
  }
}

}  // namespace volterra
