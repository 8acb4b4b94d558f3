// SPDX-License-Identifier: Apache-2.0
#include "chanmap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>

namespace chanmap {

std::vector<StageMetrics> evaluate(const std::vector<LinkRecord>& records,
                                   const PredictorModel& model,
                                   const std::vector<SnapshotInfo>& snapshots,
                                   const EvalOptions& opts) {
  if (records.empty()) throw EmptyInput("evaluate: no records");

  // Stage = ordinal of the record's step within its map's schedule.
  std::map<std::string, std::set<int>> steps_by_map;
  for (const auto& r : records) steps_by_map[r.map_id].insert(r.step);
  auto stage_of = [&](const LinkRecord& r) {
    const auto& steps = steps_by_map[r.map_id];
    return static_cast<int>(std::distance(steps.begin(), steps.find(r.step)));
  };

  std::map<std::pair<std::string, int>, double> coverage;
  for (const auto& s : snapshots) coverage[{s.map_id, s.step}] = s.coverage_frac;

  struct Acc {
    int n = 0;
    int correct = 0;
    double se_sum = 0.0;
    double step_sum = 0.0;
    double cov_sum = 0.0;
    std::array<std::array<int, 3>, 3> confusion{};
  };
  std::map<std::pair<int, int>, Acc> buckets;  // (split, stage)

  for (const auto& r : records) {
    const ChannelPrediction cp = predict(r.features, model);
    const LinkState pred = cp.predicted_state();
    const LinkState routed = opts.route_by_true_state ? r.true_s : pred;
    const double mean = cp.mean_for(routed);
    const double err = mean - r.true_g_omni;

    Acc& a = buckets[{static_cast<int>(r.split), stage_of(r)}];
    ++a.n;
    if (pred == r.true_s) ++a.correct;
    a.se_sum += err * err;
    a.step_sum += r.step;
    auto it = coverage.find({r.map_id, r.step});
    a.cov_sum += it != coverage.end() ? it->second : 0.0;
    ++a.confusion[static_cast<int>(r.true_s)][static_cast<int>(pred)];
  }

  std::vector<StageMetrics> out;
  for (const auto& [key, a] : buckets) {
    StageMetrics m;
    m.split = static_cast<Split>(key.first);
    m.stage = key.second;
    m.mean_step = a.step_sum / a.n;
    m.coverage_frac = a.cov_sum / a.n;
    m.n_links = a.n;
    m.ls_accuracy = static_cast<double>(a.correct) / a.n;
    m.gain_rmse_db = std::sqrt(a.se_sum / a.n);
    m.confusion = a.confusion;
    out.push_back(m);
  }
  return out;
}

const char* const kMetricsCsvHeader =
    "split,stage,step,coverage_frac,n_links,ls_accuracy,gain_rmse_db,"
    "cm_los_los,cm_los_nlos,cm_los_out,cm_nlos_los,cm_nlos_nlos,cm_nlos_out,"
    "cm_out_los,cm_out_nlos,cm_out_out";

void write_metrics_csv(const std::vector<StageMetrics>& metrics, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << kMetricsCsvHeader << '\n';
  f << std::fixed << std::setprecision(6);
  for (const auto& m : metrics) {
    f << to_string(m.split) << ',' << m.stage << ',' << m.mean_step << ','
      << m.coverage_frac << ',' << m.n_links << ',' << m.ls_accuracy << ','
      << m.gain_rmse_db;
    for (int t = 0; t < 3; ++t)
      for (int p = 0; p < 3; ++p) f << ',' << m.confusion[t][p];
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path);
}

std::vector<CoverageGridRow> coverage_grid(const EnvironmentMap& map,
                                           const ObservedRegion& region, WorldPoint tx,
                                           const PredictorModel& model,
                                           const TracerConfig& cfg, int cell_stride) {
  if (cell_stride < 1) throw InvalidParams("coverage_grid: stride must be >= 1");
  if (!point_is_indoor(map, tx)) throw InvalidEndpoint("coverage_grid: tx must be indoor");
  const CellIndex tx_cell = map.cell_at(tx);

  std::vector<CoverageGridRow> rows;
  for (int iy = 0; iy < map.height_cells(); iy += cell_stride)
    for (int ix = 0; ix < map.width_cells(); ix += cell_stride) {
      if (map.at(ix, iy) != CellClass::Free) continue;
      if (ix == tx_cell.ix && iy == tx_cell.iy) continue;
      const WorldPoint rx = map.cell_center(ix, iy);
      const FeatureVector fv = extract_features(map, region, tx, rx, cfg);
      const ChannelPrediction cp = predict(fv, model);
      CoverageGridRow row;
      row.x = rx.x;
      row.y = rx.y;
      row.posterior = cp.posterior;
      const LinkState pred = cp.predicted_state();
      row.mean_db = cp.mean_for(pred);
      switch (pred) {
        case LinkState::LOS: row.log_var = cp.los_gain.log_variance; break;
        case LinkState::NLOS: row.log_var = cp.nlos_gain.log_variance; break;
        case LinkState::Outage: row.log_var = -std::numeric_limits<double>::infinity(); break;
      }
      rows.push_back(row);
    }
  return rows;
}

void write_coverage_grid_csv(const std::vector<CoverageGridRow>& rows,
                             const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "x,y,p_los,p_nlos,p_out,mean_db,log_var\n";
  f << std::fixed << std::setprecision(6);
  for (const auto& r : rows)
    f << r.x << ',' << r.y << ',' << r.posterior[0] << ',' << r.posterior[1] << ','
      << r.posterior[2] << ',' << r.mean_db << ',' << r.log_var << '\n';
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace chanmap
