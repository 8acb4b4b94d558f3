// SPDX-License-Identifier: Apache-2.0
#include "chanmap/pipeline.hpp"

#include <iomanip>
#include <random>
#include <sstream>

namespace chanmap {

namespace {

WorldPoint pick_indoor_start(const EnvironmentMap& map, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CellIndex> free_cells;
  for (int iy = 0; iy < map.height_cells(); ++iy)
    for (int ix = 0; ix < map.width_cells(); ++ix)
      if (map.at(ix, iy) == CellClass::Free) free_cells.push_back({ix, iy});
  const CellIndex c =
      free_cells[std::uniform_int_distribution<std::size_t>(0, free_cells.size() - 1)(rng)];
  return map.cell_center(c);
}

}  // namespace

std::vector<MapBundle> build_world(const PipelineConfig& cfg) {
  std::vector<MapBundle> bundles;
  const int total = cfg.train_maps + cfg.test_maps;
  for (int i = 0; i < total; ++i) {
    std::ostringstream id;
    id << 'm' << std::setw(3) << std::setfill('0') << i;
    const std::uint64_t map_seed = cfg.seed * 1000 + i;
    EnvironmentMap map = generate_floorplan(map_seed, cfg.floorplan);
    const WorldPoint start = pick_indoor_start(map, map_seed ^ 0x5deece66dULL);
    ExplorationRun run =
        explore_to_coverage(map, start, cfg.coverage_stages, cfg.sensor_range_m, map_seed);
    run.map_id = id.str();
    bundles.push_back({id.str(), std::move(map), std::move(run),
                       i < cfg.train_maps ? Split::Train : Split::Test});
  }
  return bundles;
}

PredictorModel train_model(const std::vector<LinkRecord>& records, const PipelineConfig& cfg) {
  std::vector<ClassifierRow> crows;
  std::vector<GainRow> grows;
  std::vector<IndoorRow> irows;
  for (const auto& r : records) {
    if (r.split != Split::Train) continue;
    crows.push_back({r.features, r.true_s});
    grows.push_back({r.features, r.true_s, r.true_g_omni});
    irows.push_back({r.features.s_hat, r.features.d_unobs, r.rx_is_indoor});
  }
  PredictorModel model;
  model.g_min_db = cfg.tracer.g_min_db;
  model.classifier = train_link_classifier(crows, cfg.classifier_hp);
  model.gains = train_gain_predictor(grows, cfg.gain_hp, cfg.tracer.g_min_db);
  if (cfg.train_indoor) model.indoor = train_indoor_classifier(irows, cfg.indoor_hp);
  return model;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  PipelineResult res;
  res.bundles = build_world(cfg);
  res.dataset = build_dataset(res.bundles, cfg.links_per_map, cfg.tracer, cfg.seed);
  res.model = train_model(res.dataset.records, cfg);
  res.metrics = evaluate(res.dataset.records, res.model, res.dataset.snapshots);
  return res;
}

}  // namespace chanmap
