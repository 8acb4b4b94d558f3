// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "chanmap/dataset.hpp"
#include "chanmap/predictor.hpp"

namespace chanmap {

/// Metrics for one (split, exploration stage) bucket. Snapshots are bucketed
/// by their ordinal position in each map's schedule so maps with different
/// step counts line up; mean_step and coverage_frac report the bucket
/// averages.
struct StageMetrics {
  Split split = Split::Train;
  int stage = 0;
  double mean_step = 0.0;
  double coverage_frac = 0.0;
  int n_links = 0;
  double ls_accuracy = 0.0;
  double gain_rmse_db = 0.0;
  std::array<std::array<int, 3>, 3> confusion{};  // [true][predicted]
};

struct EvalOptions {
  /// Route the gain through the true link state instead of the predicted one.
  bool route_by_true_state = false;
};

/// Link-state accuracy and gain RMSE per (split, stage). The predicted mean
/// follows the predicted state (Outage -> g_min); no records are excluded.
/// Coverage fractions come from the snapshot table (matched on map_id+step;
/// missing entries count as 0). Throws EmptyInput.
std::vector<StageMetrics> evaluate(const std::vector<LinkRecord>& records,
                                   const PredictorModel& model,
                                   const std::vector<SnapshotInfo>& snapshots = {},
                                   const EvalOptions& opts = {});

extern const char* const kMetricsCsvHeader;
void write_metrics_csv(const std::vector<StageMetrics>& metrics, const std::string& path);

/// Channel prediction over every stride-th free cell of the map.
struct CoverageGridRow {
  double x = 0.0, y = 0.0;
  std::array<double, 3> posterior{0.0, 0.0, 0.0};
  double mean_db = 0.0;
  double log_var = 0.0;
};

std::vector<CoverageGridRow> coverage_grid(const EnvironmentMap& map,
                                           const ObservedRegion& region, WorldPoint tx,
                                           const PredictorModel& model,
                                           const TracerConfig& cfg, int cell_stride);

void write_coverage_grid_csv(const std::vector<CoverageGridRow>& rows,
                             const std::string& path);

}  // namespace chanmap
