// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chanmap/envmap.hpp"

namespace chanmap {

/// A simulated exploration of one map: monotone observation masks captured at
/// the requested step counts. One step = sense from the current cell, then
/// move one cell along the shortest known-free path toward the nearest
/// frontier.
struct ExplorationRun {
  std::string map_id;
  WorldPoint agent_start{0.0, 0.0};
  std::vector<int> steps_per_snapshot;
  std::vector<ObservedRegion> snapshots;
  std::vector<double> coverage_per_snapshot;  // fraction of Free cells observed
};

struct ExplorerConfig {
  double sensor_range_m = 5.0;
};

/// Frontier-based exploration. Snapshots are captured at the given ascending
/// step counts (step 0 = the all-false mask). Sensing marks every cell whose
/// center is within range and in line of sight of the agent, every cell that
/// clear sight segment passes through, and walls touching observed free
/// cells. Exploration halts once no frontier remains. Deterministic; the seed
/// is accepted for interface stability but the policy itself breaks ties by
/// path length then row-major index. Throws StartOutdoors.
ExplorationRun explore(const EnvironmentMap& map, WorldPoint start,
                       const std::vector<int>& steps, double sensor_range_m = 5.0,
                       std::uint64_t seed = 0);

/// Runs exploration to completion and returns snapshots at the steps where
/// coverage first reaches each fraction of the final (full) coverage.
/// Fractions must be ascending in [0, 1]; snapshot steps strictly increase.
ExplorationRun explore_to_coverage(const EnvironmentMap& map, WorldPoint start,
                                   const std::vector<double>& coverage_fractions,
                                   double sensor_range_m = 5.0, std::uint64_t seed = 0);

}  // namespace chanmap
