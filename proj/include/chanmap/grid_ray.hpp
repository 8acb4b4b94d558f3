// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "chanmap/envmap.hpp"
#include "chanmap/types.hpp"

namespace chanmap {

// Exact traversal of every cell a segment passes through, with per-cell chord
// lengths. Degeneracies get explicit events instead of arbitrary cell picks:
//  - a pass exactly through a lattice corner reports the two diagonally
//    pinching cells (the pass is blocked only when neither is passable);
//  - a segment lying exactly on a grid line reports both adjacent cells per
//    row/column interval.
// Visitors return false to stop the walk early.

struct GridGeom {
  int width_cells = 0;
  int height_cells = 0;
  double resolution = 0.15;
  WorldPoint origin{0.0, 0.0};

  static GridGeom of(const EnvironmentMap& m) {
    return {m.width_cells(), m.height_cells(), m.resolution(), m.origin()};
  }
  bool in_grid(int ix, int iy) const {
    return ix >= 0 && ix < width_cells && iy >= 0 && iy < height_cells;
  }
  bool contains_local(double u, double v) const {
    return u >= 0.0 && u <= width_cells && v >= 0.0 && v <= height_cells;
  }
};

namespace detail {

inline void check_segment_bounds(const GridGeom& g, WorldPoint a, WorldPoint b,
                                 double& uax, double& uay, double& ubx, double& uby) {
  uax = (a.x - g.origin.x) / g.resolution;
  uay = (a.y - g.origin.y) / g.resolution;
  ubx = (b.x - g.origin.x) / g.resolution;
  uby = (b.y - g.origin.y) / g.resolution;
  if (!std::isfinite(uax) || !std::isfinite(uay) || !std::isfinite(ubx) ||
      !std::isfinite(uby) || !g.contains_local(uax, uay) || !g.contains_local(ubx, uby))
    throw OutOfBounds("segment endpoint outside map bounds");
}

inline int clamp_cell(double u, int n) {
  int i = static_cast<int>(std::floor(u));
  return std::clamp(i, 0, n - 1);
}

}  // namespace detail

/// Walks the segment a->b over the grid.
///   on_cell(ix, iy, chord_m) — cell crossed with positive chord, in order;
///   on_corner(ix1, iy1, ix2, iy2) — exact corner pass, diagonal pinch pair
///     (indices may lie outside the grid at the map border);
///   on_edge(ixa, iya, ixb, iyb, chord_m) — grid-line run, adjacent pair per
///     interval (a-side is the lower-index cell; indices may be outside).
/// Throws OutOfBounds when an endpoint is outside the map. a == b walks nothing.
template <class CellFn, class CornerFn, class EdgeFn>
void walk_segment(const GridGeom& g, WorldPoint a, WorldPoint b, CellFn&& on_cell,
                  CornerFn&& on_corner, EdgeFn&& on_edge) {
  double uax, uay, ubx, uby;
  detail::check_segment_bounds(g, a, b, uax, uay, ubx, uby);
  if (uax == ubx && uay == uby) return;

  const double len_m = distance(a, b);
  const double dx = ubx - uax;
  const double dy = uby - uay;
  constexpr double kTEps = 1e-12;

  // Segment lying exactly on a grid line: report adjacent pairs.
  if (dx == 0.0 && uax == std::floor(uax)) {
    const int k = static_cast<int>(uax);
    const double lo = std::min(uay, uby), hi = std::max(uay, uby);
    int j0 = static_cast<int>(std::floor(lo));
    int j1 = detail::clamp_cell(hi - kTEps, g.height_cells);
    for (int j = std::max(0, j0); j <= j1; ++j) {
      const double c0 = std::max(lo, static_cast<double>(j));
      const double c1 = std::min(hi, static_cast<double>(j + 1));
      if (c1 - c0 <= kTEps) continue;
      if (!on_edge(k - 1, j, k, j, (c1 - c0) * g.resolution)) return;
    }
    return;
  }
  if (dy == 0.0 && uay == std::floor(uay)) {
    const int k = static_cast<int>(uay);
    const double lo = std::min(uax, ubx), hi = std::max(uax, ubx);
    int i0 = static_cast<int>(std::floor(lo));
    int i1 = detail::clamp_cell(hi - kTEps, g.width_cells);
    for (int i = std::max(0, i0); i <= i1; ++i) {
      const double c0 = std::max(lo, static_cast<double>(i));
      const double c1 = std::min(hi, static_cast<double>(i + 1));
      if (c1 - c0 <= kTEps) continue;
      if (!on_edge(i, k - 1, i, k, (c1 - c0) * g.resolution)) return;
    }
    return;
  }

  // Crossing parameters of interior grid lines, ascending in t per axis.
  auto crossings = [](double ua, double ub, double d, std::vector<double>& ts) {
    ts.clear();
    if (d == 0.0) return;
    if (d > 0.0) {
      for (int k = static_cast<int>(std::floor(ua)) + 1; k <= static_cast<int>(std::ceil(ub)) - 1; ++k)
        ts.push_back((k - ua) / d);
    } else {
      for (int k = static_cast<int>(std::ceil(ua)) - 1; k >= static_cast<int>(std::floor(ub)) + 1; --k)
        ts.push_back((k - ua) / d);
    }
  };
  thread_local std::vector<double> xs, ys;
  crossings(uax, ubx, dx, xs);
  crossings(uay, uby, dy, ys);

  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;

  auto emit_cell = [&](double t0, double t1) {
    if (t1 - t0 <= kTEps) return true;
    const double tm = 0.5 * (t0 + t1);
    const int ix = detail::clamp_cell(uax + tm * dx, g.width_cells);
    const int iy = detail::clamp_cell(uay + tm * dy, g.height_cells);
    return on_cell(ix, iy, (t1 - t0) * len_m);
  };

  double prev = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() || j < ys.size()) {
    const double tx = i < xs.size() ? xs[i] : 2.0;
    const double ty = j < ys.size() ? ys[j] : 2.0;
    if (std::abs(tx - ty) <= kTEps) {
      // Corner pass.
      if (!emit_cell(prev, tx)) return;
      if (tx > kTEps && tx < 1.0 - kTEps) {
        const int kx = static_cast<int>(std::lround(uax + tx * dx));
        const int ky = static_cast<int>(std::lround(uay + tx * dy));
        const int bx = kx - (sx > 0 ? 1 : 0);  // cell before the corner, x
        const int by = ky - (sy > 0 ? 1 : 0);
        const int ax = kx - (sx < 0 ? 1 : 0);  // cell after the corner, x
        const int ay = ky - (sy < 0 ? 1 : 0);
        if (!on_corner(bx, ay, ax, by)) return;
      }
      prev = std::max(tx, ty);
      ++i;
      ++j;
    } else if (tx < ty) {
      if (!emit_cell(prev, tx)) return;
      prev = tx;
      ++i;
    } else {
      if (!emit_cell(prev, ty)) return;
      prev = ty;
      ++j;
    }
  }
  emit_cell(prev, 1.0);
}

/// True when the segment crosses no Wall cell. Corner and grid-line
/// degeneracies are passable when at least one pinching cell is passable
/// (in-grid and not Wall). Symmetric in (a, b). Throws OutOfBounds.
bool segment_clear(const EnvironmentMap& map, WorldPoint a, WorldPoint b);

}  // namespace chanmap
