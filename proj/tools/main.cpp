// SPDX-License-Identifier: Apache-2.0
//
// chanmap command line: generate floorplans, simulate exploration, trace
// links, build datasets, train and evaluate the channel predictors.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "chanmap/dataset.hpp"
#include "chanmap/eval.hpp"
#include "chanmap/explorer.hpp"
#include "chanmap/pipeline.hpp"
#include "chanmap/predictor.hpp"

namespace fs = std::filesystem;
using namespace chanmap;

namespace {

WorldPoint parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("point must be 'x,y' in meters: " + s);
  return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory: " + out);
}

void log_resolved_config(CLI::App& app, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  std::ofstream f(out_dir + "/run_config.txt");
  f << app.config_to_str(true, true);
}

struct TracerCliOpts {
  TracerConfig cfg;
  void attach(CLI::App* cmd) {
    cmd->add_option("--frequency-ghz", cfg.frequency_ghz, "Carrier frequency in GHz")
        ->capture_default_str();
    cmd->add_option("--max-order", cfg.max_reflection_order, "Max reflection order (0-3)")
        ->capture_default_str();
    cmd->add_option("--reflection-loss-db", cfg.reflection_loss_db, "Loss per bounce in dB")
        ->capture_default_str();
    cmd->add_option("--g-min-db", cfg.g_min_db, "Path gain clipping floor in dB")
        ->capture_default_str();
  }
};

struct FloorplanCliOpts {
  FloorplanParams p;
  void attach(CLI::App* cmd) {
    cmd->add_option("--width-m", p.width_m, "Map width in meters")->capture_default_str();
    cmd->add_option("--height-m", p.height_m, "Map height in meters")->capture_default_str();
    cmd->add_option("--resolution-m", p.resolution_m, "Grid resolution in meters")
        ->capture_default_str();
    cmd->add_option("--min-room-m", p.min_room_m, "Minimum room dimension")
        ->capture_default_str();
    cmd->add_option("--door-width-m", p.door_width_m, "Door width")->capture_default_str();
    cmd->add_option("--wall-thickness-m", p.wall_thickness_m, "Wall thickness")
        ->capture_default_str();
    cmd->add_option("--exterior-margin-m", p.exterior_margin_m,
                    "Outdoor band around the building")
        ->capture_default_str();
  }
};

std::vector<MapBundle> load_world(const std::string& maps_dir, const std::string& runs_dir,
                                  const std::vector<std::string>& test_ids) {
  std::vector<MapBundle> bundles;
  std::vector<fs::path> map_files;
  for (const auto& e : fs::directory_iterator(maps_dir))
    if (e.path().extension() == ".json") map_files.push_back(e.path());
  std::sort(map_files.begin(), map_files.end());
  for (const auto& mf : map_files) {
    const std::string id = mf.stem().string();
    MapBundle b{id, load_map_json(mf.string()), {}, Split::Train};
    b.run.map_id = id;
    // Snapshot files: <map_id>_step<k>.json
    std::vector<std::pair<int, fs::path>> snaps;
    for (const auto& e : fs::directory_iterator(runs_dir)) {
      const std::string name = e.path().filename().string();
      const std::string prefix = id + "_step";
      if (name.rfind(prefix, 0) == 0 && e.path().extension() == ".json") {
        const std::string num = name.substr(prefix.size(), name.size() - prefix.size() - 5);
        snaps.push_back({std::stoi(num), e.path()});
      }
    }
    std::sort(snaps.begin(), snaps.end());
    if (snaps.empty()) throw IoError("no snapshots found for map " + id + " in " + runs_dir);
    for (const auto& [step, path] : snaps) {
      ObservedRegion r = load_region_json(path.string());
      const std::size_t total_free = b.map.count(CellClass::Free);
      std::size_t obs_free = 0;
      for (int iy = 0; iy < b.map.height_cells(); ++iy)
        for (int ix = 0; ix < b.map.width_cells(); ++ix)
          if (r.observed(ix, iy) && b.map.at(ix, iy) == CellClass::Free) ++obs_free;
      b.run.steps_per_snapshot.push_back(step);
      b.run.coverage_per_snapshot.push_back(
          total_free == 0 ? 0.0 : static_cast<double>(obs_free) / total_free);
      b.run.snapshots.push_back(std::move(r));
    }
    if (std::find(test_ids.begin(), test_ids.end(), id) != test_ids.end())
      b.split = Split::Test;
    bundles.push_back(std::move(b));
  }
  if (bundles.empty()) throw IoError("no map JSON files in " + maps_dir);
  return bundles;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chanmap: link-state and path-gain prediction on partially observed indoor maps"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from an INI/TOML key=value file");

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  app.add_option("--seed", seed, "Global RNG seed")->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  // --- genmaps ---
  auto* genmaps = app.add_subcommand("genmaps", "Generate synthetic floorplans");
  int gen_count = 12;
  genmaps->add_option("--count", gen_count, "Number of maps")->capture_default_str();
  FloorplanCliOpts gen_fp;
  gen_fp.attach(genmaps);

  // --- explore ---
  auto* explore_cmd = app.add_subcommand("explore", "Simulate exploration of a map");
  std::string explore_map;
  std::string explore_start = "auto";
  std::vector<int> explore_steps;
  std::vector<double> explore_coverage;
  double sensor_range = 5.0;
  explore_cmd->add_option("--map", explore_map, "Map JSON file")->required();
  explore_cmd->add_option("--start", explore_start, "Agent start 'x,y' or 'auto'");
  explore_cmd->add_option("--steps", explore_steps, "Snapshot step counts (ascending)")
      ->delimiter(',');
  explore_cmd->add_option("--coverage", explore_coverage,
                          "Snapshot coverage fractions in [0,1] (ascending)")
      ->delimiter(',');
  explore_cmd->add_option("--range", sensor_range, "Sensor range in meters")
      ->capture_default_str();

  // --- trace ---
  auto* trace_cmd = app.add_subcommand("trace", "Ray trace one TX/RX pair");
  std::string trace_map, trace_tx, trace_rx, trace_region;
  TracerCliOpts trace_tc;
  trace_cmd->add_option("--map", trace_map, "Map JSON file")->required();
  trace_cmd->add_option("--tx", trace_tx, "TX position 'x,y' in meters")->required();
  trace_cmd->add_option("--rx", trace_rx, "RX position 'x,y' in meters")->required();
  trace_cmd->add_option("--region", trace_region,
                        "Observed region JSON; traces the free-space-filled map");
  trace_tc.attach(trace_cmd);

  // --- dataset ---
  auto* dataset_cmd = app.add_subcommand("dataset", "Sample and label TX/RX links");
  std::string ds_maps_dir, ds_runs_dir;
  std::vector<std::string> ds_test_ids;
  int ds_links = 400;
  TracerCliOpts ds_tc;
  dataset_cmd->add_option("--maps", ds_maps_dir, "Directory of map JSON files")->required();
  dataset_cmd->add_option("--runs", ds_runs_dir, "Directory of snapshot JSON files")
      ->required();
  dataset_cmd->add_option("--test-maps", ds_test_ids, "Map ids assigned to the test split")
      ->delimiter(',');
  dataset_cmd->add_option("--links", ds_links, "Links per map")->capture_default_str();
  ds_tc.attach(dataset_cmd);

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "Train predictors from a records CSV");
  std::string train_data;
  PipelineConfig train_cfg;
  bool no_indoor = false;
  train_cmd->add_option("--data", train_data, "Records CSV")->required();
  train_cmd->add_option("--classifier-lr", train_cfg.classifier_hp.lr, "")
      ->capture_default_str();
  train_cmd->add_option("--classifier-epochs", train_cfg.classifier_hp.epochs, "")
      ->capture_default_str();
  train_cmd->add_option("--gain-lr", train_cfg.gain_hp.lr, "")->capture_default_str();
  train_cmd->add_option("--gain-epochs", train_cfg.gain_hp.epochs, "")->capture_default_str();
  train_cmd->add_option("--l2", train_cfg.classifier_hp.l2, "")->capture_default_str();
  train_cmd->add_flag("--no-indoor", no_indoor, "Skip the indoor/outdoor classifier");
  TracerCliOpts train_tc;
  train_tc.attach(train_cmd);

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a records CSV");
  std::string eval_data, eval_model, eval_snapshots;
  bool eval_route_true = false;
  eval_cmd->add_option("--data", eval_data, "Records CSV")->required();
  eval_cmd->add_option("--model", eval_model, "Model bundle JSON")->required();
  eval_cmd->add_option("--snapshots", eval_snapshots, "Snapshots CSV with coverage fractions");
  eval_cmd->add_flag("--route-by-true-state", eval_route_true,
                     "Route the gain through the true link state");

  // --- predict ---
  auto* predict_cmd = app.add_subcommand("predict", "Predict one link or a coverage grid");
  std::string pr_map, pr_region, pr_model, pr_tx, pr_rx;
  int pr_grid_stride = 0;
  TracerCliOpts pr_tc;
  predict_cmd->add_option("--map", pr_map, "Map JSON file")->required();
  predict_cmd->add_option("--region", pr_region, "Observed region JSON (omit for empty mask)");
  predict_cmd->add_option("--model", pr_model, "Model bundle JSON")->required();
  predict_cmd->add_option("--tx", pr_tx, "TX position 'x,y'")->required();
  predict_cmd->add_option("--rx", pr_rx, "RX position 'x,y' (single-link mode)");
  predict_cmd->add_option("--grid", pr_grid_stride, "Grid mode: evaluate every Nth free cell");
  pr_tc.attach(predict_cmd);

  // --- demo ---
  auto* demo_cmd = app.add_subcommand(
      "demo", "Run the full pipeline on small defaults and write metrics.csv");
  PipelineConfig demo_cfg;
  demo_cmd->add_option("--train-maps", demo_cfg.train_maps, "")->capture_default_str();
  demo_cmd->add_option("--test-maps", demo_cfg.test_maps, "")->capture_default_str();
  demo_cmd->add_option("--links", demo_cfg.links_per_map, "")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*genmaps) {
      log_resolved_config(app, out_dir);
      for (int i = 0; i < gen_count; ++i) {
        std::ostringstream name;
        name << 'm' << std::setw(3) << std::setfill('0') << i;
        const EnvironmentMap map = generate_floorplan(seed * 1000 + i, gen_fp.p);
        save_map_json(map, out_dir + "/" + name.str() + ".json");
      }
      std::cout << "wrote " << gen_count << " maps to " << out_dir << "\n";
    } else if (*explore_cmd) {
      log_resolved_config(app, out_dir);
      const EnvironmentMap map = load_map_json(explore_map);
      WorldPoint start;
      if (explore_start == "auto") {
        for (int iy = 0; iy < map.height_cells() && true; ++iy)
          for (int ix = 0; ix < map.width_cells(); ++ix)
            if (map.at(ix, iy) == CellClass::Free) {
              start = map.cell_center(ix, iy);
              iy = map.height_cells();
              break;
            }
      } else {
        start = parse_point(explore_start);
      }
      ExplorationRun run;
      if (!explore_coverage.empty())
        run = explore_to_coverage(map, start, explore_coverage, sensor_range, seed);
      else if (!explore_steps.empty())
        run = explore(map, start, explore_steps, sensor_range, seed);
      else
        throw InvalidParams("explore: provide --steps or --coverage");
      const std::string id = fs::path(explore_map).stem().string();
      for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
        std::ostringstream name;
        name << id << "_step" << run.steps_per_snapshot[i] << ".json";
        save_region_json(run.snapshots[i], out_dir + "/" + name.str());
        std::cout << name.str() << " coverage=" << std::fixed << std::setprecision(3)
                  << run.coverage_per_snapshot[i] << "\n";
      }
    } else if (*trace_cmd) {
      const EnvironmentMap map = load_map_json(trace_map);
      PathSet ps;
      if (!trace_region.empty()) {
        const ObservedRegion region = load_region_json(trace_region);
        const EnvironmentMap filled = fill_free_space(map, region);
        ps = trace(filled, parse_point(trace_tx), parse_point(trace_rx), trace_tc.cfg,
                   MapKind::PartialFreeSpaceFilled);
      } else {
        ps = trace(map, parse_point(trace_tx), parse_point(trace_rx), trace_tc.cfg);
      }
      std::cout << pathset_to_json(ps);
    } else if (*dataset_cmd) {
      log_resolved_config(app, out_dir);
      const auto bundles = load_world(ds_maps_dir, ds_runs_dir, ds_test_ids);
      const Dataset ds = build_dataset(bundles, ds_links, ds_tc.cfg, seed);
      write_records_csv(ds.records, out_dir + "/dataset.csv");
      write_snapshots_csv(ds.snapshots, out_dir + "/snapshots.csv");
      std::cout << "wrote " << ds.records.size() << " records to " << out_dir
                << "/dataset.csv\n";
    } else if (*train_cmd) {
      log_resolved_config(app, out_dir);
      train_cfg.seed = seed;
      train_cfg.gain_hp.l2 = std::min(train_cfg.gain_hp.l2, train_cfg.classifier_hp.l2);
      train_cfg.tracer = train_tc.cfg;
      train_cfg.train_indoor = !no_indoor;
      const auto records = read_records_csv(train_data);
      const PredictorModel model = train_model(records, train_cfg);
      save_model(model, out_dir + "/model.json");
      std::cout << "wrote model to " << out_dir << "/model.json\n";
    } else if (*eval_cmd) {
      log_resolved_config(app, out_dir);
      const auto records = read_records_csv(eval_data);
      const PredictorModel model = load_model(eval_model);
      std::vector<SnapshotInfo> snaps;
      if (!eval_snapshots.empty()) snaps = read_snapshots_csv(eval_snapshots);
      EvalOptions opts;
      opts.route_by_true_state = eval_route_true;
      const auto metrics = evaluate(records, model, snaps, opts);
      write_metrics_csv(metrics, out_dir + "/metrics.csv");
      for (const auto& m : metrics)
        std::cout << to_string(m.split) << " stage=" << m.stage << " step=" << m.mean_step
                  << " coverage=" << std::fixed << std::setprecision(3) << m.coverage_frac
                  << " accuracy=" << m.ls_accuracy << " rmse_db=" << std::setprecision(2)
                  << m.gain_rmse_db << "\n";
    } else if (*predict_cmd) {
      const EnvironmentMap map = load_map_json(pr_map);
      const ObservedRegion region = pr_region.empty()
                                        ? ObservedRegion::empty_for(map)
                                        : load_region_json(pr_region);
      const PredictorModel model = load_model(pr_model);
      const WorldPoint tx = parse_point(pr_tx);
      if (pr_grid_stride > 0) {
        log_resolved_config(app, out_dir);
        const auto rows = coverage_grid(map, region, tx, model, pr_tc.cfg, pr_grid_stride);
        write_coverage_grid_csv(rows, out_dir + "/coverage_grid.csv");
        std::cout << "wrote " << rows.size() << " grid rows to " << out_dir
                  << "/coverage_grid.csv\n";
      } else {
        if (pr_rx.empty()) throw InvalidParams("predict: provide --rx or --grid");
        const FeatureVector fv = extract_features(map, region, tx, parse_point(pr_rx), pr_tc.cfg);
        const ChannelPrediction cp = predict(fv, model);
        std::cout << std::fixed << std::setprecision(6) << "{\"p_los\": " << cp.posterior[0]
                  << ", \"p_nlos\": " << cp.posterior[1] << ", \"p_out\": " << cp.posterior[2]
                  << ", \"los_mean_db\": " << cp.los_gain.mean_db
                  << ", \"los_log_var\": " << cp.los_gain.log_variance
                  << ", \"nlos_mean_db\": " << cp.nlos_gain.mean_db
                  << ", \"nlos_log_var\": " << cp.nlos_gain.log_variance
                  << ", \"outage_gain_db\": " << cp.outage_gain_db
                  << ", \"p_indoor\": " << cp.p_indoor << "}\n";
      }
    } else if (*demo_cmd) {
      log_resolved_config(app, out_dir);
      demo_cfg.seed = seed;
      const PipelineResult res = run_pipeline(demo_cfg);
      for (const auto& b : res.bundles) {
        save_map_json(b.map, out_dir + "/" + b.map_id + ".json");
        for (std::size_t i = 0; i < b.run.snapshots.size(); ++i) {
          std::ostringstream name;
          name << b.map_id << "_step" << b.run.steps_per_snapshot[i] << ".json";
          save_region_json(b.run.snapshots[i], out_dir + "/" + name.str());
        }
      }
      write_records_csv(res.dataset.records, out_dir + "/dataset.csv");
      write_snapshots_csv(res.dataset.snapshots, out_dir + "/snapshots.csv");
      save_model(res.model, out_dir + "/model.json");
      write_metrics_csv(res.metrics, out_dir + "/metrics.csv");
      for (const auto& m : res.metrics)
        std::cout << to_string(m.split) << " stage=" << m.stage << " coverage=" << std::fixed
                  << std::setprecision(3) << m.coverage_frac << " accuracy=" << m.ls_accuracy
                  << " rmse_db=" << std::setprecision(2) << m.gain_rmse_db << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
