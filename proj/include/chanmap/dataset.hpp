// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chanmap/envmap.hpp"
#include "chanmap/explorer.hpp"
#include "chanmap/features.hpp"
#include "chanmap/raytrace.hpp"

namespace chanmap {

enum class Split : int { Train = 0, Test = 1 };

const char* to_string(Split s);

struct LinkRecord {
  std::string map_id;
  int step = 0;
  WorldPoint tx, rx;
  FeatureVector features;
  LinkState true_s = LinkState::Outage;
  double true_g_omni = 0.0;
  bool rx_is_indoor = false;
  Split split = Split::Train;
};

/// One map plus its exploration run and split assignment.
struct MapBundle {
  std::string map_id;
  EnvironmentMap map;
  ExplorationRun run;
  Split split = Split::Train;
};

/// Coverage bookkeeping for a snapshot, written alongside the records so the
/// evaluation can report coverage fractions.
struct SnapshotInfo {
  std::string map_id;
  int step = 0;
  double coverage_frac = 0.0;
};

struct Dataset {
  std::vector<LinkRecord> records;
  std::vector<SnapshotInfo> snapshots;
};

/// Samples links_per_map TX/RX pairs per map (TX uniform over indoor cells,
/// RX uniform over the whole map area), labels each pair once against the
/// full map, and extracts features for every exploration snapshot.
/// Deterministic per (seed, map_id) regardless of bundle order; records come
/// out sorted by (map_id, step, link index).
Dataset build_dataset(const std::vector<MapBundle>& bundles, int links_per_map,
                      const TracerConfig& cfg, std::uint64_t seed);

extern const char* const kRecordCsvHeader;

void write_records_csv(const std::vector<LinkRecord>& records, const std::string& path);
std::vector<LinkRecord> read_records_csv(const std::string& path);

void write_snapshots_csv(const std::vector<SnapshotInfo>& snaps, const std::string& path);
std::vector<SnapshotInfo> read_snapshots_csv(const std::string& path);

}  // namespace chanmap
