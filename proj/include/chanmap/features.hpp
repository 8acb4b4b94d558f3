// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "chanmap/envmap.hpp"
#include "chanmap/raytrace.hpp"

namespace chanmap {

/// Predictor inputs for one TX/RX pair: link state and omni gain traced on
/// the free-space-filled partial map, TX-RX distance, and the length of the
/// TX-RX chord crossing unobserved cells.
struct FeatureVector {
  LinkState s_hat = LinkState::LOS;
  double d_unobs = 0.0;
  double d = 0.0;
  double g_hat_omni = 0.0;
};

bool operator==(const FeatureVector& a, const FeatureVector& b);

/// Length of the straight tx->rx chord inside unobserved cells, by exact grid
/// traversal. The degenerate masks are exact: a full mask yields 0.0 and an
/// empty mask yields ||tx - rx|| with no accumulated rounding. Throws
/// OutOfBounds.
double unobserved_los_distance(const ObservedRegion& region, WorldPoint tx, WorldPoint rx,
                               double resolution_m, WorldPoint origin = {0.0, 0.0});

/// Fill unobserved cells with free space, trace, and assemble the features.
FeatureVector extract_features(const EnvironmentMap& map, const ObservedRegion& region,
                               WorldPoint tx, WorldPoint rx, const TracerConfig& cfg);

/// CSV row "link_id,s_hat,d_unobs_m,d_m,g_hat_db" with s_hat as 0/1/2.
extern const char* const kFeatureCsvHeader;
std::string feature_csv_row(int link_id, const FeatureVector& fv);

}  // namespace chanmap
