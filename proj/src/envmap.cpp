// SPDX-License-Identifier: Apache-2.0
#include "chanmap/envmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace chanmap {

EnvironmentMap::EnvironmentMap(int width_cells, int height_cells, double resolution_m,
                               WorldPoint origin, CellClass fill)
    : width_(width_cells),
      height_(height_cells),
      resolution_(resolution_m),
      origin_(origin) {
  if (width_cells < 4 || height_cells < 4)
    throw InvalidParams("EnvironmentMap: grid must be at least 4x4 cells");
  if (!(resolution_m > 0.0))
    throw InvalidParams("EnvironmentMap: resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width_) * height_, fill);
}

bool EnvironmentMap::contains(WorldPoint p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  const double u = (p.x - origin_.x) / resolution_;
  const double v = (p.y - origin_.y) / resolution_;
  return u >= 0.0 && u <= width_ && v >= 0.0 && v <= height_;
}

CellIndex EnvironmentMap::cell_at(WorldPoint p) const {
  if (!contains(p)) {
    std::ostringstream os;
    os << "point (" << p.x << ", " << p.y << ") outside map bounds";
    throw OutOfBounds(os.str());
  }
  const double u = (p.x - origin_.x) / resolution_;
  const double v = (p.y - origin_.y) / resolution_;
  int ix = std::min(static_cast<int>(std::floor(u)), width_ - 1);
  int iy = std::min(static_cast<int>(std::floor(v)), height_ - 1);
  return {ix, iy};
}

WorldPoint EnvironmentMap::cell_center(CellIndex c) const {
  return {origin_.x + (c.ix + 0.5) * resolution_,
          origin_.y + (c.iy + 0.5) * resolution_};
}

std::size_t EnvironmentMap::count(CellClass c) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), c));
}

double EnvironmentMap::free_fraction() const {
  return static_cast<double>(count(CellClass::Free)) / cells_.size();
}

ObservedRegion ObservedRegion::uniform(int width_cells, int height_cells, bool observed,
                                       int step_index) {
  ObservedRegion r;
  r.width_cells = width_cells;
  r.height_cells = height_cells;
  r.step_index = step_index;
  r.mask.assign(static_cast<std::size_t>(width_cells) * height_cells, observed ? 1 : 0);
  return r;
}

ObservedRegion ObservedRegion::full_for(const EnvironmentMap& map, int step_index) {
  return uniform(map.width_cells(), map.height_cells(), true, step_index);
}

ObservedRegion ObservedRegion::empty_for(const EnvironmentMap& map, int step_index) {
  return uniform(map.width_cells(), map.height_cells(), false, step_index);
}

std::size_t ObservedRegion::observed_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

bool ObservedRegion::subset_of(const ObservedRegion& other) const {
  if (width_cells != other.width_cells || height_cells != other.height_cells) return false;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] && !other.mask[i]) return false;
  return true;
}

namespace {

struct Rect {
  int x0, y0, x1, y1;  // half-open [x0,x1) x [y0,y1)
  int w() const { return x1 - x0; }
  int h() const { return y1 - y0; }
};

struct WallRec {
  bool vertical;  // wall strip runs along y (constant-x band)
  int pos;        // first cell column/row of the strip
  int lo, hi;     // strip extent along its length, half-open
  int thickness;
};

void fill_rect(EnvironmentMap& map, const Rect& r, CellClass c) {
  for (int iy = r.y0; iy < r.y1; ++iy)
    for (int ix = r.x0; ix < r.x1; ++ix) map.set(ix, iy, c);
}

int cells_of(double meters, double res) {
  return static_cast<int>(std::lround(meters / res));
}

}  // namespace

EnvironmentMap generate_floorplan(std::uint64_t seed, const FloorplanParams& p) {
  if (!(p.width_m > 0) || !(p.height_m > 0) || !(p.resolution_m > 0) ||
      !(p.min_room_m > 0) || !(p.door_width_m > 0) || !(p.wall_thickness_m > 0) ||
      p.exterior_margin_m < 0)
    throw InvalidParams("generate_floorplan: all dimensions must be positive");
  if (p.door_width_m >= p.min_room_m)
    throw InvalidParams("generate_floorplan: door_width_m must be below min_room_m");
  if (p.min_room_m < 3.0 * p.resolution_m)
    throw InvalidParams("generate_floorplan: min_room_m must be at least 3 cells");

  const double res = p.resolution_m;
  const int W = std::max(4, cells_of(p.width_m, res));
  const int H = std::max(4, cells_of(p.height_m, res));
  const int wall_t = std::max(1, cells_of(p.wall_thickness_m, res));
  const int door_c = std::max(1, cells_of(p.door_width_m, res));
  const int min_room = std::max(3, cells_of(p.min_room_m, res));
  int margin = cells_of(p.exterior_margin_m, res);

  // Keep at least a 1-cell free interior inside the perimeter wall.
  margin = std::min(margin, (std::min(W, H) - 2 * wall_t - 1) / 2);
  margin = std::max(margin, 0);

  EnvironmentMap map(W, H, res, {0.0, 0.0}, CellClass::Exterior);

  const Rect building{margin, margin, W - margin, H - margin};
  fill_rect(map, building, CellClass::Wall);
  const Rect interior{building.x0 + wall_t, building.y0 + wall_t,
                      building.x1 - wall_t, building.y1 - wall_t};
  if (interior.w() <= 0 || interior.h() <= 0)
    throw InvalidParams("generate_floorplan: map too small for walls and margin");
  fill_rect(map, interior, CellClass::Free);

  std::mt19937_64 rng(seed);
  std::vector<WallRec> walls;
  std::vector<Rect> stack{interior};
  while (!stack.empty()) {
    Rect r = stack.back();
    stack.pop_back();
    const bool can_x = r.w() >= 2 * min_room + wall_t;
    const bool can_y = r.h() >= 2 * min_room + wall_t;
    if (!can_x && !can_y) continue;

    // Occasionally keep a splittable region as one larger room.
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.15) continue;

    bool split_x;
    if (can_x && can_y) {
      if (r.w() > r.h())
        split_x = true;
      else if (r.h() > r.w())
        split_x = false;
      else
        split_x = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    } else {
      split_x = can_x;
    }

    if (split_x) {
      const int s = std::uniform_int_distribution<int>(min_room, r.w() - min_room - wall_t)(rng);
      const int wx = r.x0 + s;
      fill_rect(map, {wx, r.y0, wx + wall_t, r.y1}, CellClass::Wall);
      walls.push_back({true, wx, r.y0, r.y1, wall_t});
      stack.push_back({r.x0, r.y0, wx, r.y1});
      stack.push_back({wx + wall_t, r.y0, r.x1, r.y1});
    } else {
      const int s = std::uniform_int_distribution<int>(min_room, r.h() - min_room - wall_t)(rng);
      const int wy = r.y0 + s;
      fill_rect(map, {r.x0, wy, r.x1, wy + wall_t}, CellClass::Wall);
      walls.push_back({false, wy, r.x0, r.x1, wall_t});
      stack.push_back({r.x0, r.y0, r.x1, wy});
      stack.push_back({r.x0, wy + wall_t, r.x1, r.y1});
    }
  }

  // Carve exactly one door per partition wall. Valid door spans have Free
  // cells immediately on both sides for the whole gap, so a door never opens
  // into the end of a perpendicular wall. Spans are computed with all walls
  // already placed; the first corner room always provides one.
  for (const WallRec& w : walls) {
    auto side_free = [&](int along) {
      if (w.vertical)
        return map.at(w.pos - 1, along) == CellClass::Free &&
               map.at(w.pos + w.thickness, along) == CellClass::Free;
      return map.at(along, w.pos - 1) == CellClass::Free &&
             map.at(along, w.pos + w.thickness) == CellClass::Free;
    };
    std::vector<int> starts;
    for (int s = w.lo; s + door_c <= w.hi; ++s) {
      bool ok = true;
      for (int j = s; j < s + door_c && ok; ++j) ok = side_free(j);
      if (ok) starts.push_back(s);
    }
    if (starts.empty())
      throw InvalidParams("generate_floorplan: no valid door span on a partition wall");
    const int s = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)];
    for (int j = s; j < s + door_c; ++j)
      for (int t = 0; t < w.thickness; ++t) {
        if (w.vertical)
          map.set(w.pos + t, j, CellClass::Free);
        else
          map.set(j, w.pos + t, CellClass::Free);
      }
  }

  return map;
}

EnvironmentMap fill_free_space(const EnvironmentMap& map, const ObservedRegion& region) {
  if (!region.same_grid(map))
    throw DimensionMismatch("fill_free_space: region dimensions do not match map");
  EnvironmentMap out = map;
  for (int iy = 0; iy < map.height_cells(); ++iy)
    for (int ix = 0; ix < map.width_cells(); ++ix)
      if (!region.observed(ix, iy)) out.set(ix, iy, CellClass::Free);
  return out;
}

bool point_is_indoor(const EnvironmentMap& map, WorldPoint p) {
  return map.at(map.cell_at(p)) == CellClass::Free;
}

namespace {

constexpr char kClassChars[] = {'F', 'W', 'X'};

CellClass class_from_char(char c) {
  switch (c) {
    case 'F': return CellClass::Free;
    case 'W': return CellClass::Wall;
    case 'X': return CellClass::Exterior;
    default: throw IoError(std::string("unknown cell character '") + c + "'");
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

std::string map_to_json(const EnvironmentMap& map) {
  std::string cells;
  cells.reserve(map.cells().size());
  for (CellClass c : map.cells()) cells.push_back(kClassChars[static_cast<int>(c)]);
  nlohmann::json j{{"width_cells", map.width_cells()},
                   {"height_cells", map.height_cells()},
                   {"resolution_m", map.resolution()},
                   {"origin", {map.origin().x, map.origin().y}},
                   {"cells", cells}};
  return j.dump(2) + "\n";
}

EnvironmentMap map_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("map JSON parse error: ") + e.what());
  }
  try {
    const int w = j.at("width_cells").get<int>();
    const int h = j.at("height_cells").get<int>();
    const double res = j.at("resolution_m").get<double>();
    const auto& o = j.at("origin");
    EnvironmentMap map(w, h, res, {o.at(0).get<double>(), o.at(1).get<double>()});
    const std::string cells = j.at("cells").get<std::string>();
    if (cells.size() != static_cast<std::size_t>(w) * h)
      throw IoError("map JSON: cells length does not match dimensions");
    for (int iy = 0; iy < h; ++iy)
      for (int ix = 0; ix < w; ++ix)
        map.set(ix, iy, class_from_char(cells[static_cast<std::size_t>(iy) * w + ix]));
    return map;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("map JSON field error: ") + e.what());
  }
}

void save_map_json(const EnvironmentMap& map, const std::string& path) {
  write_text_file(path, map_to_json(map));
}

EnvironmentMap load_map_json(const std::string& path) {
  try {
    return map_from_json(read_text_file(path));
  } catch (const IoError& e) {
    throw IoError(std::string(e.what()) + " [" + path + "]");
  }
}

std::string region_to_json(const ObservedRegion& region) {
  std::string cells;
  cells.reserve(region.mask.size());
  for (std::uint8_t m : region.mask) cells.push_back(m ? '1' : '0');
  nlohmann::json j{{"width_cells", region.width_cells},
                   {"height_cells", region.height_cells},
                   {"step_index", region.step_index},
                   {"cells", cells}};
  return j.dump(2) + "\n";
}

ObservedRegion region_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("region JSON parse error: ") + e.what());
  }
  try {
    ObservedRegion r;
    r.width_cells = j.at("width_cells").get<int>();
    r.height_cells = j.at("height_cells").get<int>();
    r.step_index = j.at("step_index").get<int>();
    const std::string cells = j.at("cells").get<std::string>();
    if (cells.size() != static_cast<std::size_t>(r.width_cells) * r.height_cells)
      throw IoError("region JSON: cells length does not match dimensions");
    r.mask.resize(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i] != '0' && cells[i] != '1')
        throw IoError("region JSON: cells must be '0'/'1'");
      r.mask[i] = cells[i] == '1' ? 1 : 0;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("region JSON field error: ") + e.what());
  }
}

void save_region_json(const ObservedRegion& region, const std::string& path) {
  write_text_file(path, region_to_json(region));
}

ObservedRegion load_region_json(const std::string& path) {
  try {
    return region_from_json(read_text_file(path));
  } catch (const IoError& e) {
    throw IoError(std::string(e.what()) + " [" + path + "]");
  }
}

}  // namespace chanmap
