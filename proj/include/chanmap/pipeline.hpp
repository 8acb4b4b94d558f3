// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "chanmap/dataset.hpp"
#include "chanmap/eval.hpp"
#include "chanmap/explorer.hpp"
#include "chanmap/predictor.hpp"

namespace chanmap {

/// End-to-end experiment configuration with the tuned defaults used by the
/// demo subcommand and the acceptance run.
struct PipelineConfig {
  std::uint64_t seed = 1;
  int train_maps = 4;
  int test_maps = 2;
  int links_per_map = 100;
  FloorplanParams floorplan;
  TracerConfig tracer;
  double sensor_range_m = 5.0;
  std::vector<double> coverage_stages{0.0, 0.25, 0.5, 0.75, 1.0};
  TrainHParams classifier_hp{0.5, 4000, 1e-4, 11, 64};
  TrainHParams gain_hp{3e-3, 1500, 1e-5, 23, 64};
  TrainHParams indoor_hp{0.5, 2000, 1e-4, 37, 64};
  bool train_indoor = true;
};

/// Generates the floorplans, samples an indoor start per map, and runs
/// exploration to the configured coverage stages. Map ids are m000, m001, ...
/// with the first train_maps assigned to the train split.
std::vector<MapBundle> build_world(const PipelineConfig& cfg);

/// Trains classifier, gain heads, and (optionally) the indoor model on the
/// train-split records.
PredictorModel train_model(const std::vector<LinkRecord>& records, const PipelineConfig& cfg);

struct PipelineResult {
  std::vector<MapBundle> bundles;
  Dataset dataset;
  PredictorModel model;
  std::vector<StageMetrics> metrics;
};

PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace chanmap
