// SPDX-License-Identifier: Apache-2.0
#include "chanmap/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace chanmap {

const char* to_string(Split s) { return s == Split::Train ? "train" : "test"; }

namespace {

std::uint64_t mix_seed(std::uint64_t seed, const std::string& map_id) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  for (char c : map_id) h = (h ^ static_cast<std::uint64_t>(c)) * 0x100000001b3ULL;
  return h;
}

WorldPoint sample_indoor_point(const EnvironmentMap& map, std::mt19937_64& rng) {
  std::vector<CellIndex> free_cells;
  for (int iy = 0; iy < map.height_cells(); ++iy)
    for (int ix = 0; ix < map.width_cells(); ++ix)
      if (map.at(ix, iy) == CellClass::Free) free_cells.push_back({ix, iy});
  if (free_cells.empty()) throw InvalidParams("build_dataset: map has no free cells");
  const CellIndex c =
      free_cells[std::uniform_int_distribution<std::size_t>(0, free_cells.size() - 1)(rng)];
  // Jittered inside the cell, away from the exact boundary.
  std::uniform_real_distribution<double> u(0.1, 0.9);
  return {map.origin().x + (c.ix + u(rng)) * map.resolution(),
          map.origin().y + (c.iy + u(rng)) * map.resolution()};
}

WorldPoint sample_area_point(const EnvironmentMap& map, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0.0, map.width_m());
  std::uniform_real_distribution<double> uy(0.0, map.height_m());
  return {map.origin().x + ux(rng), map.origin().y + uy(rng)};
}

}  // namespace

Dataset build_dataset(const std::vector<MapBundle>& bundles, int links_per_map,
                      const TracerConfig& cfg, std::uint64_t seed) {
  if (links_per_map < 0) throw InvalidParams("build_dataset: links_per_map must be >= 0");

  std::vector<const MapBundle*> order;
  for (const auto& b : bundles) order.push_back(&b);
  std::sort(order.begin(), order.end(),
            [](const MapBundle* a, const MapBundle* b) { return a->map_id < b->map_id; });

  Dataset out;
  for (const MapBundle* b : order) {
    const EnvironmentMap& map = b->map;
    std::mt19937_64 rng(mix_seed(seed, b->map_id));

    for (std::size_t si = 0; si < b->run.snapshots.size(); ++si)
      out.snapshots.push_back({b->map_id, b->run.steps_per_snapshot[si],
                               b->run.coverage_per_snapshot[si]});

    for (int li = 0; li < links_per_map; ++li) {
      WorldPoint tx = sample_indoor_point(map, rng);
      WorldPoint rx = sample_area_point(map, rng);
      while (distance(tx, rx) < map.resolution()) rx = sample_area_point(map, rng);

      const PathSet truth = trace(map, tx, rx, cfg, MapKind::FullMap);
      const LinkState true_s = link_state(truth, cfg);
      const double true_g = omni_gain(truth, cfg);
      const bool indoor = point_is_indoor(map, rx);

      for (std::size_t si = 0; si < b->run.snapshots.size(); ++si) {
        LinkRecord rec;
        rec.map_id = b->map_id;
        rec.step = b->run.steps_per_snapshot[si];
        rec.tx = tx;
        rec.rx = rx;
        rec.features = extract_features(map, b->run.snapshots[si], tx, rx, cfg);
        rec.true_s = true_s;
        rec.true_g_omni = true_g;
        rec.rx_is_indoor = indoor;
        rec.split = b->split;
        out.records.push_back(std::move(rec));
      }
    }
  }

  // Canonical ordering: map_id, step, then link order within the map.
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const LinkRecord& a, const LinkRecord& b) {
                     if (a.map_id != b.map_id) return a.map_id < b.map_id;
                     return a.step < b.step;
                   });
  return out;
}

const char* const kRecordCsvHeader =
    "map_id,step,tx_x,tx_y,rx_x,rx_y,s_hat,d_unobs_m,d_m,g_hat_db,true_s,true_g_db,"
    "rx_indoor,split";

void write_records_csv(const std::vector<LinkRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << kRecordCsvHeader << '\n';
  f << std::fixed << std::setprecision(6);
  for (const auto& r : records) {
    f << r.map_id << ',' << r.step << ',' << r.tx.x << ',' << r.tx.y << ',' << r.rx.x << ','
      << r.rx.y << ',' << static_cast<int>(r.features.s_hat) << ',' << r.features.d_unobs
      << ',' << r.features.d << ',' << r.features.g_hat_omni << ','
      << static_cast<int>(r.true_s) << ',' << r.true_g_omni << ',' << (r.rx_is_indoor ? 1 : 0)
      << ',' << to_string(r.split) << '\n';
  }
  if (!f) throw IoError("write failed: " + path);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

LinkState state_from_int(int v) {
  if (v < 0 || v > 2) throw IoError("records CSV: link state out of range");
  return static_cast<LinkState>(v);
}

}  // namespace

std::vector<LinkRecord> read_records_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(f, line) || line != kRecordCsvHeader)
    throw IoError("records CSV: bad or missing header: " + path);
  std::vector<LinkRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cols = split_line(line);
    if (cols.size() != 14) throw IoError("records CSV: wrong column count: " + path);
    LinkRecord r;
    r.map_id = cols[0];
    r.step = std::stoi(cols[1]);
    r.tx = {std::stod(cols[2]), std::stod(cols[3])};
    r.rx = {std::stod(cols[4]), std::stod(cols[5])};
    r.features.s_hat = state_from_int(std::stoi(cols[6]));
    r.features.d_unobs = std::stod(cols[7]);
    r.features.d = std::stod(cols[8]);
    r.features.g_hat_omni = std::stod(cols[9]);
    r.true_s = state_from_int(std::stoi(cols[10]));
    r.true_g_omni = std::stod(cols[11]);
    r.rx_is_indoor = cols[12] == "1";
    if (cols[13] == "train")
      r.split = Split::Train;
    else if (cols[13] == "test")
      r.split = Split::Test;
    else
      throw IoError("records CSV: unknown split value: " + cols[13]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_snapshots_csv(const std::vector<SnapshotInfo>& snaps, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << "map_id,step,coverage_frac\n";
  f << std::fixed << std::setprecision(6);
  for (const auto& s : snaps) f << s.map_id << ',' << s.step << ',' << s.coverage_frac << '\n';
  if (!f) throw IoError("write failed: " + path);
}

std::vector<SnapshotInfo> read_snapshots_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "map_id,step,coverage_frac")
    throw IoError("snapshots CSV: bad or missing header: " + path);
  std::vector<SnapshotInfo> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cols = split_line(line);
    if (cols.size() != 3) throw IoError("snapshots CSV: wrong column count: " + path);
    out.push_back({cols[0], std::stoi(cols[1]), std::stod(cols[2])});
  }
  return out;
}

}  // namespace chanmap
