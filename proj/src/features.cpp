// SPDX-License-Identifier: Apache-2.0
#include "chanmap/features.hpp"

#include <iomanip>
#include <sstream>

#include "chanmap/grid_ray.hpp"

namespace chanmap {

bool operator==(const FeatureVector& a, const FeatureVector& b) {
  return a.s_hat == b.s_hat && a.d_unobs == b.d_unobs && a.d == b.d &&
         a.g_hat_omni == b.g_hat_omni;
}

double unobserved_los_distance(const ObservedRegion& region, WorldPoint tx, WorldPoint rx,
                               double resolution_m, WorldPoint origin) {
  GridGeom g{region.width_cells, region.height_cells, resolution_m, origin};
  double unobs = 0.0;
  bool any_obs = false, any_unobs = false;
  auto tally = [&](int ix, int iy, double chord) {
    if (region.observed(ix, iy)) {
      any_obs = true;
    } else {
      any_unobs = true;
      unobs += chord;
    }
    return true;
  };
  walk_segment(
      g, tx, rx, tally, [](int, int, int, int) { return true; },
      [&](int ixa, int iya, int ixb, int iyb, double chord) {
        // Grid-line run: attribute the chord to the upper/right cell when it
        // exists, mirroring the floor convention used elsewhere.
        if (g.in_grid(ixb, iyb)) return tally(ixb, iyb, chord);
        return tally(ixa, iya, chord);
      });
  if (!any_unobs) return 0.0;
  if (!any_obs) return distance(tx, rx);
  return unobs;
}

FeatureVector extract_features(const EnvironmentMap& map, const ObservedRegion& region,
                               WorldPoint tx, WorldPoint rx, const TracerConfig& cfg) {
  if (!region.same_grid(map))
    throw DimensionMismatch("extract_features: region dimensions do not match map");
  const EnvironmentMap filled = fill_free_space(map, region);
  const PathSet ps = trace(filled, tx, rx, cfg, MapKind::PartialFreeSpaceFilled);
  FeatureVector fv;
  fv.s_hat = link_state(ps, cfg);
  fv.d_unobs = unobserved_los_distance(region, tx, rx, map.resolution(), map.origin());
  fv.d = distance(tx, rx);
  fv.g_hat_omni = omni_gain(ps, cfg);
  return fv;
}

const char* const kFeatureCsvHeader = "link_id,s_hat,d_unobs_m,d_m,g_hat_db";

std::string feature_csv_row(int link_id, const FeatureVector& fv) {
  std::ostringstream os;
  os << link_id << ',' << static_cast<int>(fv.s_hat) << ',' << std::fixed
     << std::setprecision(6) << fv.d_unobs << ',' << fv.d << ',' << fv.g_hat_omni;
  return os.str();
}

}  // namespace chanmap
