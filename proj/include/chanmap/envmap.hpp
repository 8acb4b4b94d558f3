// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chanmap/types.hpp"

namespace chanmap {

enum class CellClass : std::uint8_t { Free = 0, Wall = 1, Exterior = 2 };

/// 2D occupancy grid with per-cell material class. Cell (ix, iy) covers the
/// world rectangle [origin + i*res, origin + (i+1)*res). Immutable in normal
/// use; set() exists for builders and tests.
class EnvironmentMap {
public:
  EnvironmentMap(int width_cells, int height_cells, double resolution_m,
                 WorldPoint origin = {0.0, 0.0}, CellClass fill = CellClass::Free);

  int width_cells() const { return width_; }
  int height_cells() const { return height_; }
  double resolution() const { return resolution_; }
  WorldPoint origin() const { return origin_; }
  double width_m() const { return width_ * resolution_; }
  double height_m() const { return height_ * resolution_; }

  CellClass at(int ix, int iy) const { return cells_[idx(ix, iy)]; }
  CellClass at(CellIndex c) const { return at(c.ix, c.iy); }
  void set(int ix, int iy, CellClass c) { cells_[idx(ix, iy)] = c; }

  bool in_grid(int ix, int iy) const {
    return ix >= 0 && ix < width_ && iy >= 0 && iy < height_;
  }
  bool is_wall(int ix, int iy) const { return at(ix, iy) == CellClass::Wall; }

  /// World-bounds test (closed rectangle; the top/right edge maps to the last cell).
  bool contains(WorldPoint p) const;
  /// Cell containing p. Throws OutOfBounds when p is outside the map.
  CellIndex cell_at(WorldPoint p) const;
  WorldPoint cell_center(CellIndex c) const;
  WorldPoint cell_center(int ix, int iy) const { return cell_center(CellIndex{ix, iy}); }

  double free_fraction() const;
  std::size_t count(CellClass c) const;

  bool same_grid(const EnvironmentMap& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  const std::vector<CellClass>& cells() const { return cells_; }

private:
  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * width_ + ix;
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.15;
  WorldPoint origin_{0.0, 0.0};
  std::vector<CellClass> cells_;
};

/// Boolean observation mask over a map's grid. True marks observed cells.
struct ObservedRegion {
  int width_cells = 0;
  int height_cells = 0;
  int step_index = 0;
  std::vector<std::uint8_t> mask;  // row-major, 1 = observed

  static ObservedRegion uniform(int width_cells, int height_cells, bool observed,
                                int step_index = 0);
  static ObservedRegion full_for(const EnvironmentMap& map, int step_index = 0);
  static ObservedRegion empty_for(const EnvironmentMap& map, int step_index = 0);

  bool observed(int ix, int iy) const {
    return mask[static_cast<std::size_t>(iy) * width_cells + ix] != 0;
  }
  void set(int ix, int iy, bool v) {
    mask[static_cast<std::size_t>(iy) * width_cells + ix] = v ? 1 : 0;
  }
  std::size_t observed_count() const;
  bool same_grid(const EnvironmentMap& map) const {
    return width_cells == map.width_cells() && height_cells == map.height_cells();
  }
  /// True when this mask is a subset of other (cell-exact).
  bool subset_of(const ObservedRegion& other) const;
};

struct FloorplanParams {
  double width_m = 12.0;
  double height_m = 12.0;
  double resolution_m = 0.15;
  double min_room_m = 2.2;
  double door_width_m = 0.9;
  double wall_thickness_m = 0.3;
  /// Band of outdoor (Exterior) cells kept around the building footprint.
  double exterior_margin_m = 1.05;
};

/// Recursive binary-space-partition floorplan: solid perimeter wall, one door
/// per interior partition wall, Exterior band outside the building.
/// Deterministic function of (seed, params).
EnvironmentMap generate_floorplan(std::uint64_t seed, const FloorplanParams& params = {});

/// Copy of `map` where every cell outside the observed region becomes Free.
EnvironmentMap fill_free_space(const EnvironmentMap& map, const ObservedRegion& region);

/// True iff the cell containing p is Free. Throws OutOfBounds.
bool point_is_indoor(const EnvironmentMap& map, WorldPoint p);

void save_map_json(const EnvironmentMap& map, const std::string& path);
EnvironmentMap load_map_json(const std::string& path);
std::string map_to_json(const EnvironmentMap& map);
EnvironmentMap map_from_json(const std::string& text);

void save_region_json(const ObservedRegion& region, const std::string& path);
ObservedRegion load_region_json(const std::string& path);
std::string region_to_json(const ObservedRegion& region);
ObservedRegion region_from_json(const std::string& text);

}  // namespace chanmap
