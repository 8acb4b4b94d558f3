// SPDX-License-Identifier: Apache-2.0
//
// Shared oracles and fixtures for the test suites. Everything here is
// independent of the library's traversal/tracing internals: the supersampling
// occlusion oracle walks sample points, the flood fills run plain BFS.
#pragma once

#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <vector>

#include "chanmap/envmap.hpp"
#include "chanmap/types.hpp"

namespace testsupport {

using chanmap::CellClass;
using chanmap::EnvironmentMap;
using chanmap::ObservedRegion;
using chanmap::WorldPoint;

/// Occlusion oracle: sample the segment every resolution/10 and test the cell
/// containing each sample point for Wall.
inline bool segment_clear_oracle(const EnvironmentMap& map, WorldPoint a, WorldPoint b) {
  const double len = chanmap::distance(a, b);
  const double step = map.resolution() / 10.0;
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const WorldPoint p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    if (map.at(map.cell_at(p)) == CellClass::Wall) return false;
  }
  return true;
}

/// Supersampled unobserved-chord estimate at resolution/10.
inline double unobserved_distance_oracle(const ObservedRegion& region, WorldPoint a,
                                         WorldPoint b, double resolution) {
  const double len = chanmap::distance(a, b);
  const double step = resolution / 10.0;
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  int unobs = 0;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    const double u = (a.x + t * (b.x - a.x)) / resolution;
    const double v = (a.y + t * (b.y - a.y)) / resolution;
    const int ix = std::min(static_cast<int>(std::floor(u)), region.width_cells - 1);
    const int iy = std::min(static_cast<int>(std::floor(v)), region.height_cells - 1);
    if (!region.observed(ix, iy)) ++unobs;
  }
  return len * unobs / n;
}

/// 4-connected component count over Free cells.
inline int free_component_count(const EnvironmentMap& map) {
  const int W = map.width_cells(), H = map.height_cells();
  std::vector<char> seen(static_cast<std::size_t>(W) * H, 0);
  int components = 0;
  for (int sy = 0; sy < H; ++sy)
    for (int sx = 0; sx < W; ++sx) {
      if (seen[static_cast<std::size_t>(sy) * W + sx] || map.at(sx, sy) != CellClass::Free)
        continue;
      ++components;
      std::queue<std::pair<int, int>> q;
      q.push({sx, sy});
      seen[static_cast<std::size_t>(sy) * W + sx] = 1;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop();
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
          auto& s = seen[static_cast<std::size_t>(ny) * W + nx];
          if (s || map.at(nx, ny) != CellClass::Free) continue;
          s = 1;
          q.push({nx, ny});
        }
      }
    }
  return components;
}

/// Free cells reachable (4-connected) from a start cell.
inline std::vector<chanmap::CellIndex> reachable_free_cells(const EnvironmentMap& map,
                                                            chanmap::CellIndex start) {
  const int W = map.width_cells(), H = map.height_cells();
  std::vector<char> seen(static_cast<std::size_t>(W) * H, 0);
  std::vector<chanmap::CellIndex> out;
  std::queue<chanmap::CellIndex> q;
  q.push(start);
  seen[static_cast<std::size_t>(start.iy) * W + start.ix] = 1;
  while (!q.empty()) {
    auto c = q.front();
    q.pop();
    out.push_back(c);
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = c.ix + dx[k], ny = c.iy + dy[k];
      if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
      auto& s = seen[static_cast<std::size_t>(ny) * W + nx];
      if (s || map.at(nx, ny) != CellClass::Free) continue;
      s = 1;
      q.push({nx, ny});
    }
  }
  return out;
}

/// Flood fill from the map border through non-Wall cells; Free cells not
/// reached are "interior" in the oracle's sense.
inline std::vector<char> outside_reachable(const EnvironmentMap& map) {
  const int W = map.width_cells(), H = map.height_cells();
  std::vector<char> reached(static_cast<std::size_t>(W) * H, 0);
  std::queue<std::pair<int, int>> q;
  auto push = [&](int x, int y) {
    if (x < 0 || x >= W || y < 0 || y >= H) return;
    auto& r = reached[static_cast<std::size_t>(y) * W + x];
    if (r || map.at(x, y) == CellClass::Wall) return;
    r = 1;
    q.push({x, y});
  };
  for (int x = 0; x < W; ++x) {
    push(x, 0);
    push(x, H - 1);
  }
  for (int y = 0; y < H; ++y) {
    push(0, y);
    push(W - 1, y);
  }
  while (!q.empty()) {
    auto [cx, cy] = q.front();
    q.pop();
    push(cx + 1, cy);
    push(cx - 1, cy);
    push(cx, cy + 1);
    push(cx, cy - 1);
  }
  return reached;
}

/// Random interior point of a random Free cell.
inline WorldPoint random_free_point(const EnvironmentMap& map, std::mt19937_64& rng) {
  std::vector<chanmap::CellIndex> free_cells;
  for (int iy = 0; iy < map.height_cells(); ++iy)
    for (int ix = 0; ix < map.width_cells(); ++ix)
      if (map.at(ix, iy) == CellClass::Free) free_cells.push_back({ix, iy});
  const auto c = free_cells[std::uniform_int_distribution<std::size_t>(
      0, free_cells.size() - 1)(rng)];
  std::uniform_real_distribution<double> u(0.1, 0.9);
  return {map.origin().x + (c.ix + u(rng)) * map.resolution(),
          map.origin().y + (c.iy + u(rng)) * map.resolution()};
}

/// Uniform point anywhere on the map.
inline WorldPoint random_area_point(const EnvironmentMap& map, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0.0, map.width_m());
  std::uniform_real_distribution<double> uy(0.0, map.height_m());
  return {map.origin().x + ux(rng), map.origin().y + uy(rng)};
}

/// Central finite-difference gradient of f at x.
template <class F>
std::vector<double> fd_gradient(F&& f, std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Relative gradient mismatch: max abs component difference over the larger
/// gradient magnitude.
inline double grad_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double max_diff = 0.0, max_mag = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(a[i] - b[i]));
    max_mag = std::max({max_mag, std::abs(a[i]), std::abs(b[i])});
  }
  return max_diff / std::max(max_mag, 1e-12);
}

}  // namespace testsupport
