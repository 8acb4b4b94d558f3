// SPDX-License-Identifier: Apache-2.0
#include "chanmap/raytrace.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "chanmap/grid_ray.hpp"

namespace chanmap {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
constexpr double kMinLegLength = 1e-9;  // meters
}  // namespace

const char* to_string(LinkState s) {
  switch (s) {
    case LinkState::LOS: return "LOS";
    case LinkState::NLOS: return "NLOS";
    case LinkState::Outage: return "Outage";
  }
  return "?";
}

double Path::length_m() const {
  double len = 0.0;
  for (std::size_t i = 1; i < route.size(); ++i) len += distance(route[i - 1], route[i]);
  return len;
}

bool PathSet::has_direct() const {
  for (const Path& p : paths)
    if (p.order == 0) return true;
  return false;
}

double fspl_db(double d_m, double frequency_ghz) {
  return 20.0 * std::log10(4.0 * M_PI * d_m * frequency_ghz * 1e9 / kSpeedOfLight);
}

bool segment_clear(const EnvironmentMap& map, WorldPoint a, WorldPoint b) {
  bool clear = true;
  auto passable = [&](int ix, int iy) {
    return map.in_grid(ix, iy) && map.at(ix, iy) != CellClass::Wall;
  };
  walk_segment(
      GridGeom::of(map), a, b,
      [&](int ix, int iy, double) {
        if (map.at(ix, iy) == CellClass::Wall) {
          clear = false;
          return false;
        }
        return true;
      },
      [&](int ix1, int iy1, int ix2, int iy2) {
        if (!passable(ix1, iy1) && !passable(ix2, iy2)) {
          clear = false;
          return false;
        }
        return true;
      },
      [&](int ixa, int iya, int ixb, int iyb, double) {
        if (!passable(ixa, iya) && !passable(ixb, iyb)) {
          clear = false;
          return false;
        }
        return true;
      });
  return clear;
}

std::vector<WallFace> extract_wall_faces(const EnvironmentMap& map) {
  std::vector<WallFace> faces;
  const double res = map.resolution();
  const WorldPoint o = map.origin();
  const int W = map.width_cells(), H = map.height_cells();

  // Vertical faces on lines x = k between cells (k-1, j) and (k, j).
  for (int k = 1; k < W; ++k) {
    for (int side = 0; side < 2; ++side) {
      // side 0: wall on the left, open side +1; side 1: wall on the right.
      int run_start = -1;
      for (int j = 0; j <= H; ++j) {
        bool face = false;
        if (j < H) {
          const bool lw = map.is_wall(k - 1, j);
          const bool rw = map.is_wall(k, j);
          face = side == 0 ? (lw && !rw) : (!lw && rw);
        }
        if (face && run_start < 0) run_start = j;
        if (!face && run_start >= 0) {
          faces.push_back({true, o.x + k * res, o.y + run_start * res, o.y + j * res,
                           side == 0 ? +1 : -1});
          run_start = -1;
        }
      }
    }
  }
  // Horizontal faces on lines y = k between cells (i, k-1) and (i, k).
  for (int k = 1; k < H; ++k) {
    for (int side = 0; side < 2; ++side) {
      int run_start = -1;
      for (int i = 0; i <= W; ++i) {
        bool face = false;
        if (i < W) {
          const bool bw = map.is_wall(i, k - 1);
          const bool tw = map.is_wall(i, k);
          face = side == 0 ? (bw && !tw) : (!bw && tw);
        }
        if (face && run_start < 0) run_start = i;
        if (!face && run_start >= 0) {
          faces.push_back({false, o.y + k * res, o.x + run_start * res, o.x + i * res,
                           side == 0 ? +1 : -1});
          run_start = -1;
        }
      }
    }
  }
  return faces;
}

namespace {

WorldPoint mirror(WorldPoint p, const WallFace& f) {
  if (f.vertical) return {2.0 * f.line - p.x, p.y};
  return {p.x, 2.0 * f.line - p.y};
}

double signed_side(WorldPoint p, const WallFace& f) {
  return f.vertical ? (p.x - f.line) * f.open_side : (p.y - f.line) * f.open_side;
}

// Specular point of the ray image->target on the face line, or nullopt-like
// failure via the returned flag. The point is constructed with the face
// coordinate exact, so leg validation never grazes into the wall behind it.
bool specular_point(WorldPoint image, WorldPoint target, const WallFace& f, WorldPoint& out) {
  const double a = f.vertical ? image.x : image.y;
  const double b = f.vertical ? target.x : target.y;
  const double denom = b - a;
  if (denom == 0.0) return false;
  const double t = (f.line - a) / denom;
  if (!(t > 0.0 && t < 1.0)) return false;
  const double along = f.vertical ? image.y + t * (target.y - image.y)
                                  : image.x + t * (target.x - image.x);
  if (along < f.lo || along > f.hi) return false;
  out = f.vertical ? WorldPoint{f.line, along} : WorldPoint{along, f.line};
  return true;
}

struct ImageTracer {
  const EnvironmentMap& map;
  const TracerConfig& cfg;
  const std::vector<WallFace> faces;
  WorldPoint tx, rx;
  std::vector<Path> found;

  ImageTracer(const EnvironmentMap& m, const TracerConfig& c, WorldPoint t, WorldPoint r)
      : map(m), cfg(c), faces(extract_wall_faces(m)), tx(t), rx(r) {}

  void add_if_valid(const std::vector<int>& seq, const std::vector<WorldPoint>& images) {
    const int order = static_cast<int>(seq.size());
    // Unfold the specular points back-to-front.
    std::vector<WorldPoint> pts(order);
    WorldPoint target = rx;
    for (int i = order - 1; i >= 0; --i) {
      const WallFace& f = faces[seq[i]];
      if (!specular_point(images[i], target, f, pts[i])) return;
      target = pts[i];
    }
    // Every vertex of the physical route must sit on the open side of the
    // faces it reflects off.
    for (int i = 0; i < order; ++i) {
      const WallFace& f = faces[seq[i]];
      const WorldPoint before = i == 0 ? tx : pts[i - 1];
      const WorldPoint after = i == order - 1 ? rx : pts[i + 1];
      if (!(signed_side(before, f) > 0.0) || !(signed_side(after, f) > 0.0)) return;
    }
    std::vector<WorldPoint> route;
    route.reserve(order + 2);
    route.push_back(tx);
    for (const WorldPoint& p : pts) route.push_back(p);
    route.push_back(rx);
    double total = 0.0;
    for (int i = 0; i + 1 <= order + 1; ++i) {
      const double leg = distance(route[i], route[i + 1]);
      if (leg < kMinLegLength) return;
      total += leg;
      if (!segment_clear(map, route[i], route[i + 1])) return;
    }
    const double gain = -fspl_db(total, cfg.frequency_ghz) - order * cfg.reflection_loss_db;
    if (gain < cfg.g_min_db) return;
    found.push_back({gain, order, std::move(route)});
  }

  void enumerate(std::vector<int>& seq, std::vector<WorldPoint>& images, int depth) {
    if (depth > 0) add_if_valid(seq, images);
    if (depth == cfg.max_reflection_order) return;
    const WorldPoint base = depth == 0 ? tx : images.back();
    for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi) {
      if (depth > 0) {
        const WallFace& prev = faces[seq.back()];
        const WallFace& cur = faces[fi];
        if (seq.back() == fi) continue;
        if (prev.vertical == cur.vertical && prev.line == cur.line) continue;
      }
      seq.push_back(fi);
      images.push_back(mirror(base, faces[fi]));
      enumerate(seq, images, depth + 1);
      images.pop_back();
      seq.pop_back();
    }
  }
};

}  // namespace

PathSet trace(const EnvironmentMap& map, WorldPoint tx, WorldPoint rx,
              const TracerConfig& cfg, MapKind kind) {
  if (!(cfg.frequency_ghz > 0.0) || cfg.max_reflection_order < 0 ||
      cfg.max_reflection_order > 3 || !(cfg.g_min_db < 0.0))
    throw InvalidParams("trace: invalid tracer config");
  if (!map.contains(tx) || !map.contains(rx))
    throw InvalidEndpoint("trace: endpoint outside map bounds");
  if (tx == rx) throw InvalidEndpoint("trace: tx and rx coincide");
  if (map.at(map.cell_at(tx)) == CellClass::Wall)
    throw InvalidEndpoint("trace: tx lies inside a wall");

  PathSet ps;
  ps.tx = tx;
  ps.rx = rx;
  ps.map_kind = kind;

  if (segment_clear(map, tx, rx)) {
    const double gain = -fspl_db(distance(tx, rx), cfg.frequency_ghz);
    if (gain >= cfg.g_min_db) ps.paths.push_back({gain, 0, {tx, rx}});
  }

  if (cfg.max_reflection_order > 0) {
    ImageTracer tracer(map, cfg, tx, rx);
    std::vector<int> seq;
    std::vector<WorldPoint> images;
    tracer.enumerate(seq, images, 0);
    for (Path& p : tracer.found) ps.paths.push_back(std::move(p));
  }
  return ps;
}

double omni_gain(const PathSet& ps, const TracerConfig& cfg) {
  if (ps.paths.empty()) return cfg.g_min_db;
  double power = 0.0;
  for (const Path& p : ps.paths) power += std::pow(10.0, p.gain_db / 10.0);
  return std::max(10.0 * std::log10(power), cfg.g_min_db);
}

LinkState link_state(const PathSet& ps, const TracerConfig&) {
  if (ps.paths.empty()) return LinkState::Outage;
  if (ps.has_direct()) return LinkState::LOS;
  return LinkState::NLOS;
}

std::string pathset_to_json(const PathSet& ps) {
  nlohmann::json paths = nlohmann::json::array();
  for (const Path& p : ps.paths) {
    nlohmann::json route = nlohmann::json::array();
    for (const WorldPoint& v : p.route) route.push_back({v.x, v.y});
    paths.push_back({{"gain_db", p.gain_db}, {"order", p.order}, {"route", route}});
  }
  nlohmann::json j{{"tx", {ps.tx.x, ps.tx.y}},
                   {"rx", {ps.rx.x, ps.rx.y}},
                   {"map_kind", ps.map_kind == MapKind::FullMap ? "full" : "free_space_filled"},
                   {"paths", paths}};
  return j.dump(2) + "\n";
}

PathSet pathset_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    PathSet ps;
    ps.tx = {j.at("tx").at(0).get<double>(), j.at("tx").at(1).get<double>()};
    ps.rx = {j.at("rx").at(0).get<double>(), j.at("rx").at(1).get<double>()};
    ps.map_kind = j.at("map_kind").get<std::string>() == "full" ? MapKind::FullMap
                                                                : MapKind::PartialFreeSpaceFilled;
    for (const auto& pj : j.at("paths")) {
      Path p;
      p.gain_db = pj.at("gain_db").get<double>();
      p.order = pj.at("order").get<int>();
      for (const auto& v : pj.at("route"))
        p.route.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      ps.paths.push_back(std::move(p));
    }
    return ps;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("pathset JSON error: ") + e.what());
  }
}

}  // namespace chanmap
