// SPDX-License-Identifier: Apache-2.0
#include "chanmap/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "chanmap/grid_ray.hpp"
#include "chanmap/raytrace.hpp"

namespace chanmap {

namespace {

// Neighbor order fixes BFS tie-breaking.
constexpr int kDx[4] = {0, -1, 1, 0};
constexpr int kDy[4] = {-1, 0, 0, 1};

class ExplorationSim {
public:
  ExplorationSim(const EnvironmentMap& map, CellIndex start, double sensor_range_m)
      : map_(map),
        mask_(ObservedRegion::empty_for(map)),
        pos_(start),
        range_m_(sensor_range_m),
        total_free_(map.count(CellClass::Free)) {
    if (!(sensor_range_m > 0.0)) throw InvalidParams("explore: sensor range must be positive");
  }

  const ObservedRegion& mask() const { return mask_; }
  bool done() const { return done_; }
  double coverage() const {
    return total_free_ == 0 ? 0.0 : static_cast<double>(observed_free_) / total_free_;
  }
  const std::vector<CellIndex>& trajectory() const { return trajectory_; }

  /// Sense then move. Returns false once exploration is complete.
  bool step() {
    if (done_) return false;
    sense();
    const CellIndex goal = nearest_frontier();
    if (goal.ix < 0) {
      done_ = true;
      return false;
    }
    pos_ = first_move_toward(goal);
    trajectory_.push_back(pos_);
    return true;
  }

private:
  void mark(int ix, int iy) {
    if (mask_.observed(ix, iy)) return;
    mask_.set(ix, iy, true);
    if (map_.at(ix, iy) == CellClass::Free) ++observed_free_;
  }

  void sense() {
    const double res = map_.resolution();
    const int r_cells = static_cast<int>(std::ceil(range_m_ / res)) + 1;
    const WorldPoint eye = map_.cell_center(pos_);
    const GridGeom geom = GridGeom::of(map_);
    const int x0 = std::max(0, pos_.ix - r_cells), x1 = std::min(map_.width_cells() - 1, pos_.ix + r_cells);
    const int y0 = std::max(0, pos_.iy - r_cells), y1 = std::min(map_.height_cells() - 1, pos_.iy + r_cells);

    std::vector<CellIndex> chain;
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        if (mask_.observed(ix, iy)) continue;
        const WorldPoint c = map_.cell_center({ix, iy});
        if (distance(eye, c) > range_m_) continue;
        chain.clear();
        bool clear = true;
        auto passable = [&](int cx, int cy) {
          return map_.in_grid(cx, cy) && map_.at(cx, cy) != CellClass::Wall;
        };
        walk_segment(
            geom, eye, c,
            [&](int cx, int cy, double) {
              if (map_.at(cx, cy) == CellClass::Wall) {
                clear = false;
                return false;
              }
              chain.push_back({cx, cy});
              return true;
            },
            [&](int ax, int ay, int bx, int by) {
              // Keep the observed set 4-connected across exact corner passes
              // by marking the passable pinch cells too.
              const bool pa = passable(ax, ay), pb = passable(bx, by);
              if (!pa && !pb) {
                clear = false;
                return false;
              }
              if (pa) chain.push_back({ax, ay});
              if (pb) chain.push_back({bx, by});
              return true;
            },
            [&](int ax, int ay, int bx, int by, double) {
              const bool pa = passable(ax, ay), pb = passable(bx, by);
              if (!pa && !pb) {
                clear = false;
                return false;
              }
              if (pa) chain.push_back({ax, ay});
              if (pb) chain.push_back({bx, by});
              return true;
            });
        if (!clear) continue;
        mark(ix, iy);
        for (const CellIndex& cc : chain) mark(cc.ix, cc.iy);
      }
    }

    // SLAM-style maps keep the walls that bound seen space: mark walls
    // 8-adjacent to observed free cells.
    for (int iy = 0; iy < map_.height_cells(); ++iy)
      for (int ix = 0; ix < map_.width_cells(); ++ix) {
        if (mask_.observed(ix, iy) || map_.at(ix, iy) != CellClass::Wall) continue;
        bool adj = false;
        for (int dy = -1; dy <= 1 && !adj; ++dy)
          for (int dx = -1; dx <= 1 && !adj; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = ix + dx, ny = iy + dy;
            adj = map_.in_grid(nx, ny) && mask_.observed(nx, ny) &&
                  map_.at(nx, ny) == CellClass::Free;
          }
        if (adj) mark(ix, iy);
      }
  }

  bool is_frontier(int ix, int iy) const {
    if (!mask_.observed(ix, iy) || map_.at(ix, iy) != CellClass::Free) return false;
    for (int n = 0; n < 4; ++n) {
      const int nx = ix + kDx[n], ny = iy + kDy[n];
      if (map_.in_grid(nx, ny) && !mask_.observed(nx, ny)) return true;
    }
    return false;
  }

  /// BFS over observed free cells; nearest frontier, ties by row-major index.
  /// Returns {-1,-1} when none is reachable.
  CellIndex nearest_frontier() {
    const int W = map_.width_cells(), H = map_.height_cells();
    dist_.assign(static_cast<std::size_t>(W) * H, -1);
    parent_.assign(static_cast<std::size_t>(W) * H, -1);
    std::deque<int> q;
    const int s = pos_.iy * W + pos_.ix;
    dist_[s] = 0;
    q.push_back(s);
    int best = -1, best_dist = std::numeric_limits<int>::max();
    while (!q.empty()) {
      const int cur = q.front();
      q.pop_front();
      const int cx = cur % W, cy = cur / W;
      const int d = dist_[cur];
      if (d > best_dist) break;
      if (is_frontier(cx, cy)) {
        if (d < best_dist || (d == best_dist && cur < best)) {
          best = cur;
          best_dist = d;
        }
        continue;
      }
      for (int n = 0; n < 4; ++n) {
        const int nx = cx + kDx[n], ny = cy + kDy[n];
        if (!map_.in_grid(nx, ny)) continue;
        const int ni = ny * W + nx;
        if (dist_[ni] >= 0) continue;
        if (!mask_.observed(nx, ny) || map_.at(nx, ny) != CellClass::Free) continue;
        dist_[ni] = d + 1;
        parent_[ni] = cur;
        q.push_back(ni);
      }
    }
    if (best < 0) return {-1, -1};
    return {best % W, best / W};
  }

  CellIndex first_move_toward(CellIndex goal) const {
    const int W = map_.width_cells();
    int cur = goal.iy * W + goal.ix;
    if (cur == pos_.iy * W + pos_.ix) return pos_;
    while (parent_[cur] >= 0 && parent_[cur] != pos_.iy * W + pos_.ix) cur = parent_[cur];
    return {cur % W, cur / W};
  }

  const EnvironmentMap& map_;
  ObservedRegion mask_;
  CellIndex pos_;
  double range_m_;
  std::size_t total_free_ = 0;
  std::size_t observed_free_ = 0;
  bool done_ = false;
  std::vector<CellIndex> trajectory_;
  std::vector<int> dist_;
  std::vector<int> parent_;
};

CellIndex start_cell(const EnvironmentMap& map, WorldPoint start) {
  if (!map.contains(start)) throw StartOutdoors("explore: start outside map bounds");
  const CellIndex c = map.cell_at(start);
  if (map.at(c) != CellClass::Free) throw StartOutdoors("explore: start is not indoor");
  return c;
}

}  // namespace

ExplorationRun explore(const EnvironmentMap& map, WorldPoint start,
                       const std::vector<int>& steps, double sensor_range_m,
                       std::uint64_t /*seed*/) {
  if (!std::is_sorted(steps.begin(), steps.end()))
    throw InvalidParams("explore: steps must be ascending");
  for (int s : steps)
    if (s < 0) throw InvalidParams("explore: steps must be nonnegative");

  ExplorationSim sim(map, start_cell(map, start), sensor_range_m);
  ExplorationRun run;
  run.agent_start = start;
  std::size_t next = 0;
  int k = 0;
  auto capture = [&]() {
    ObservedRegion snap = sim.mask();
    snap.step_index = k;
    run.steps_per_snapshot.push_back(k);
    run.snapshots.push_back(std::move(snap));
    run.coverage_per_snapshot.push_back(sim.coverage());
  };
  while (next < steps.size() && steps[next] == 0) {
    capture();
    ++next;
  }
  while (next < steps.size()) {
    sim.step();
    ++k;
    while (next < steps.size() && steps[next] == k) {
      capture();
      ++next;
    }
    if (sim.done()) {
      while (next < steps.size()) {
        k = steps[next];
        capture();
        ++next;
      }
      break;
    }
  }
  return run;
}

ExplorationRun explore_to_coverage(const EnvironmentMap& map, WorldPoint start,
                                   const std::vector<double>& coverage_fractions,
                                   double sensor_range_m, std::uint64_t seed) {
  if (!std::is_sorted(coverage_fractions.begin(), coverage_fractions.end()))
    throw InvalidParams("explore_to_coverage: fractions must be ascending");
  for (double f : coverage_fractions)
    if (f < 0.0 || f > 1.0)
      throw InvalidParams("explore_to_coverage: fractions must lie in [0, 1]");

  // First pass: run to completion and record the coverage trajectory.
  std::vector<double> coverage{0.0};
  {
    ExplorationSim sim(map, start_cell(map, start), sensor_range_m);
    while (sim.step()) coverage.push_back(sim.coverage());
    coverage.push_back(sim.coverage());  // the final sense before halting
  }
  const double final_cov = coverage.back();

  std::vector<int> steps;
  int prev = -1;
  for (double f : coverage_fractions) {
    int k;
    if (f == 0.0) {
      k = 0;
    } else {
      const double target = f * final_cov;
      k = static_cast<int>(coverage.size()) - 1;
      for (std::size_t i = 0; i < coverage.size(); ++i)
        if (coverage[i] >= target - 1e-12) {
          k = static_cast<int>(i);
          break;
        }
      k = std::max(k, prev + 1);
    }
    steps.push_back(k);
    prev = k;
  }
  return explore(map, start, steps, sensor_range_m, seed);
}

}  // namespace chanmap
