// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "chanmap/envmap.hpp"
#include "chanmap/types.hpp"

namespace chanmap {

enum class LinkState : int { LOS = 0, NLOS = 1, Outage = 2 };

const char* to_string(LinkState s);

/// One propagation path. order = number of specular reflections; the route
/// polyline has order + 2 vertices from TX to RX.
struct Path {
  double gain_db = 0.0;
  int order = 0;
  std::vector<WorldPoint> route;
  double length_m() const;
};

enum class MapKind { FullMap, PartialFreeSpaceFilled };

struct PathSet {
  std::vector<Path> paths;
  WorldPoint tx, rx;
  MapKind map_kind = MapKind::FullMap;
  bool has_direct() const;
};

struct TracerConfig {
  double frequency_ghz = 28.0;
  int max_reflection_order = 2;
  double reflection_loss_db = 10.0;
  double g_min_db = -150.0;
};

/// Free-space path loss in dB at distance d_m.
double fspl_db(double d_m, double frequency_ghz);

/// Axis-aligned reflector: a maximal run of Wall-cell boundary faces on one
/// grid line, with the open (non-Wall) side recorded.
struct WallFace {
  bool vertical = false;  // face lies on a constant-x line
  double line = 0.0;      // world coordinate of the line (x if vertical else y)
  double lo = 0.0;        // world extent along the line
  double hi = 0.0;
  int open_side = 1;      // +1: passable side at larger coordinate, -1: smaller
};

std::vector<WallFace> extract_wall_faces(const EnvironmentMap& map);

/// Multipath trace by the image method: the direct path when unobstructed,
/// plus specular reflection paths up to cfg.max_reflection_order, each leg
/// validated against the grid. Per-path gain is -FSPL(route length) minus
/// reflection_loss_db per bounce; paths below g_min_db are dropped.
/// Throws InvalidEndpoint (tx == rx, endpoints out of bounds, tx in a Wall
/// cell) and InvalidParams for a bad config.
PathSet trace(const EnvironmentMap& map, WorldPoint tx, WorldPoint rx,
              const TracerConfig& cfg = {}, MapKind kind = MapKind::FullMap);

/// Clipped omni-directional path gain: power sum over paths in dB, floored at
/// g_min_db; g_min_db for an empty path set.
double omni_gain(const PathSet& ps, const TracerConfig& cfg);

/// LOS if a direct path exists, Outage if no path survived, NLOS otherwise.
LinkState link_state(const PathSet& ps, const TracerConfig& cfg);

std::string pathset_to_json(const PathSet& ps);
PathSet pathset_from_json(const std::string& text);

}  // namespace chanmap
