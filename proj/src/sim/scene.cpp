/*
 * Copyright 2026 The radarseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "radarseg/random.hpp"
#include "radarseg/simworld.hpp"

namespace radarseg::sim {

std::string to_string(SceneClass c) {
  switch (c) {
    case SceneClass::kLab: return "lab";
    case SceneClass::kCorridor: return "corridor";
    case SceneClass::kOpen: return "open";
    case SceneClass::kTunnel: return "tunnel";
  }
  return "unknown";
}

SceneClass scene_class_from_string(const std::string& name) {
  for (SceneClass c : kAllSceneClasses) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown scene class '" + name + "'");
}

std::vector<WallSegment> Scene::walls() const {
  if (!bounded) return {};
  const Box& r = room;
  return {{r.x_min, r.y_min, r.x_max, r.y_min, r.z_min, r.z_max},
          {r.x_max, r.y_min, r.x_max, r.y_max, r.z_min, r.z_max},
          {r.x_max, r.y_max, r.x_min, r.y_max, r.z_min, r.z_max},
          {r.x_min, r.y_max, r.x_min, r.y_min, r.z_min, r.z_max}};
}

bool Scene::point_free(double x, double y, double clearance) const {
  if (bounded) {
    if (x < room.x_min + clearance || x > room.x_max - clearance ||
        y < room.y_min + clearance || y > room.y_max - clearance) {
      return false;
    }
  }
  for (const Box& b : obstacles) {
    if (b.contains_xy(x, y, clearance)) return false;
  }
  return true;
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_count(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool overlaps(const Box& a, const Box& b, double gap) {
  return a.x_min < b.x_max + gap && b.x_min < a.x_max + gap && a.y_min < b.y_max + gap &&
         b.y_min < a.y_max + gap;
}

// Free-standing boxes kept `gap` away from the walls and from each other so
// every obstacle can be walked around.
bool place_free_box(Scene& scene, std::mt19937_64& rng, double min_side, double max_side,
                    double min_h, double max_h, double gap) {
  const Box& r = scene.room;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double sx = uniform(rng, min_side, max_side);
    const double sy = uniform(rng, min_side, max_side);
    const double lo_x = r.x_min + gap, hi_x = r.x_max - gap - sx;
    const double lo_y = r.y_min + gap, hi_y = r.y_max - gap - sy;
    if (hi_x <= lo_x || hi_y <= lo_y) return false;
    Box b;
    b.x_min = uniform(rng, lo_x, hi_x);
    b.y_min = uniform(rng, lo_y, hi_y);
    b.x_max = b.x_min + sx;
    b.y_max = b.y_min + sy;
    b.z_min = 0.0;
    b.z_max = uniform(rng, min_h, max_h);
    const bool clash = std::any_of(scene.obstacles.begin(), scene.obstacles.end(),
                                   [&](const Box& o) { return overlaps(o, b, gap); });
    if (!clash) {
      scene.obstacles.push_back(b);
      return true;
    }
  }
  return false;
}

// Box flush against one of the two long (y) walls, e.g. cabinets or rock
// outcrops.
void place_wall_box(Scene& scene, std::mt19937_64& rng, double min_len, double max_len,
                    double min_depth, double max_depth, double max_h) {
  const Box& r = scene.room;
  const double len = uniform(rng, min_len, max_len);
  const double depth = uniform(rng, min_depth, max_depth);
  Box b;
  b.x_min = uniform(rng, r.x_min, std::max(r.x_min, r.x_max - len));
  b.x_max = std::min(r.x_max, b.x_min + len);
  if (rng() & 1) {
    b.y_min = r.y_min;
    b.y_max = r.y_min + depth;
  } else {
    b.y_max = r.y_max;
    b.y_min = r.y_max - depth;
  }
  b.z_min = 0.0;
  b.z_max = uniform(rng, 1.0, max_h);
  scene.obstacles.push_back(b);
}

void add_face(std::vector<Scatterer>& out, std::mt19937_64& rng, double x0, double y0,
              double x1, double y1, double z_min, double z_max, double density, double refl_lo,
              double refl_hi) {
  const double len = std::hypot(x1 - x0, y1 - y0);
  // Scatterers live in the band a forward-looking radar actually sees.
  const double lo = std::max(z_min, 0.1);
  const double hi = std::min(z_max, 2.5);
  if (len <= 0 || hi <= lo) return;
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(len * density)));
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + uniform(rng, 0.0, 1.0)) / static_cast<double>(n);
    Scatterer p;
    p.x = x0 + s * (x1 - x0);
    p.y = y0 + s * (y1 - y0);
    p.z = uniform(rng, lo, hi);
    p.reflectivity = uniform(rng, refl_lo, refl_hi);
    out.push_back(p);
  }
}

}  // namespace

void place_scatterers(Scene& scene, std::uint64_t seed, double density) {
  if (!(density > 0)) throw std::invalid_argument("scatterer density must be > 0");
  std::mt19937_64 rng(seed);
  for (const auto& w : scene.walls()) {
    add_face(scene.scatterers, rng, w.x0, w.y0, w.x1, w.y1, w.z_min, w.z_max, density, 0.5, 1.0);
  }
  for (const auto& b : scene.obstacles) {
    add_face(scene.scatterers, rng, b.x_min, b.y_min, b.x_max, b.y_min, b.z_min, b.z_max, density, 0.8, 2.0);
    add_face(scene.scatterers, rng, b.x_max, b.y_min, b.x_max, b.y_max, b.z_min, b.z_max, density, 0.8, 2.0);
    add_face(scene.scatterers, rng, b.x_max, b.y_max, b.x_min, b.y_max, b.z_min, b.z_max, density, 0.8, 2.0);
    add_face(scene.scatterers, rng, b.x_min, b.y_max, b.x_min, b.y_min, b.z_min, b.z_max, density, 0.8, 2.0);
  }
}

Scene build_scene(SceneClass scene_class, std::uint64_t seed, const SceneParams& params) {
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(scene_class)));
  double length = params.length;
  double width = params.width;
  switch (scene_class) {
    case SceneClass::kLab:
      if (length == 0) length = uniform(rng, 8.0, 12.0);
      if (width == 0) width = uniform(rng, 6.0, 9.0);
      break;
    case SceneClass::kCorridor:
      if (length == 0) length = uniform(rng, 20.0, 30.0);
      if (width == 0) width = uniform(rng, 2.2, 3.0);
      break;
    case SceneClass::kOpen:
      if (length == 0) length = uniform(rng, 14.0, 22.0);
      if (width == 0) width = uniform(rng, 12.0, 18.0);
      break;
    case SceneClass::kTunnel:
      if (length == 0) length = uniform(rng, 25.0, 40.0);
      if (width == 0) width = uniform(rng, 3.0, 4.5);
      break;
  }
  if (length < 2.0 || width < 2.0 || params.height < 2.0) {
    throw std::invalid_argument("scene extents must be at least 2 m");
  }

  Scene scene;
  scene.scene_class = scene_class;
  scene.room = Box{0.0, 0.0, length, width, 0.0, params.height};

  switch (scene_class) {
    case SceneClass::kLab: {
      // Benches, racks and cabinets. At least five must fit.
      const std::size_t target = uniform_count(rng, 5, 8);
      for (std::size_t i = 0; i < target; ++i) {
        if (!place_free_box(scene, rng, 0.6, 1.4, 0.8, 2.0, 0.8) && scene.obstacles.size() < 5) {
          throw std::invalid_argument("lab room too small for five obstacles");
        }
      }
      break;
    }
    case SceneClass::kCorridor: {
      const std::size_t n = uniform_count(rng, 0, 2);
      for (std::size_t i = 0; i < n; ++i) place_wall_box(scene, rng, 0.6, 1.5, 0.3, 0.5, 2.0);
      break;
    }
    case SceneClass::kOpen: {
      const std::size_t n = uniform_count(rng, 0, 2);
      for (std::size_t i = 0; i < n; ++i) {
        place_free_box(scene, rng, 0.5, 0.8, params.height, params.height, 1.5);
      }
      break;
    }
    case SceneClass::kTunnel: {
      const std::size_t n = uniform_count(rng, 6, 12);
      for (std::size_t i = 0; i < n; ++i) place_wall_box(scene, rng, 0.6, 2.5, 0.2, 0.6, params.height);
      break;
    }
  }
  place_scatterers(scene, mix_seed(seed, 0x5ca7), params.scatterer_density);
  return scene;
}

// ---------------------------------------------------------------------------
// Ray casting

namespace {

// Slab test; returns the entry distance of a ray that starts outside the box.
std::optional<double> ray_box_entry_2d(const Box& b, double ox, double oy, double dx, double dy) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  const double o[2] = {ox, oy}, d[2] = {dx, dy};
  const double lo[2] = {b.x_min, b.y_min}, hi[2] = {b.x_max, b.y_max};
  for (int a = 0; a < 2; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a];
    double tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t1 < std::max(t0, 0.0)) return std::nullopt;
  return std::max(t0, 0.0);
}

}  // namespace

std::optional<double> cast_ray_2d(const Scene& scene, double x, double y, double dir_x,
                                  double dir_y) {
  const double norm = std::hypot(dir_x, dir_y);
  if (norm == 0) throw std::invalid_argument("ray direction must be nonzero");
  const double dx = dir_x / norm, dy = dir_y / norm;
  std::optional<double> best;
  if (scene.bounded) {
    double t = std::numeric_limits<double>::infinity();
    if (dx > 0) t = std::min(t, (scene.room.x_max - x) / dx);
    if (dx < 0) t = std::min(t, (scene.room.x_min - x) / dx);
    if (dy > 0) t = std::min(t, (scene.room.y_max - y) / dy);
    if (dy < 0) t = std::min(t, (scene.room.y_min - y) / dy);
    best = std::max(t, 0.0);
  }
  for (const Box& b : scene.obstacles) {
    if (auto t = ray_box_entry_2d(b, x, y, dx, dy)) {
      if (!best || *t < *best) best = t;
    }
  }
  return best;
}

FovLabel geometric_fov(const Scene& scene, const PoseSE3& pose, const GridGeometry& grid) {
  FovLabel label(grid.rows, grid.cols);
  const double ox = pose.translation.x(), oy = pose.translation.y();
  for (std::size_t c = 0; c < grid.cols; ++c) {
    const double az = grid.column_center_deg(c) * std::numbers::pi / 180.0;
    const Eigen::Vector3d dir = pose.rotation * Eigen::Vector3d(std::cos(az), std::sin(az), 0.0);
    const auto hit = cast_ray_2d(scene, ox, oy, dir.x(), dir.y());
    std::size_t first_blocked = grid.rows;
    if (hit) {
      const double b = std::floor(*hit / grid.range_cell());
      if (b < static_cast<double>(grid.rows)) first_blocked = static_cast<std::size_t>(b);
    }
    for (std::size_t r = 0; r < first_blocked; ++r) label.set(r, c, true);
  }
  return label;
}

// ---------------------------------------------------------------------------
// Trajectory

std::vector<TrajectoryState> trajectory(const Scene& scene, std::size_t num_frames,
                                        const TrajectoryParams& params, std::uint64_t seed) {
  if (num_frames == 0) throw std::invalid_argument("trajectory needs at least one frame");
  if (!(params.speed >= 0) || !(params.frame_dt > 0)) {
    throw std::invalid_argument("trajectory speed must be >= 0 and frame_dt > 0");
  }
  std::mt19937_64 rng(seed);
  double lo_x = scene.room.x_min, hi_x = scene.room.x_max;
  double lo_y = scene.room.y_min, hi_y = scene.room.y_max;
  if (!scene.bounded) {
    lo_x = lo_y = -10.0;
    hi_x = hi_y = 10.0;
  }

  double x = 0, y = 0;
  bool found = false;
  for (int attempt = 0; attempt < 5000 && !found; ++attempt) {
    x = uniform(rng, lo_x, hi_x);
    y = uniform(rng, lo_y, hi_y);
    found = scene.point_free(x, y, params.clearance);
  }
  if (!found) throw std::runtime_error("no collision-free start position in scene");

  auto segment_free = [&](double x0, double y0, double x1, double y1) {
    const double len = std::hypot(x1 - x0, y1 - y0);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.05)));
    for (int i = 1; i <= steps; ++i) {
      const double s = static_cast<double>(i) / steps;
      if (!scene.point_free(x0 + s * (x1 - x0), y0 + s * (y1 - y0), params.clearance)) return false;
    }
    return true;
  };

  std::normal_distribution<double> turn(0.0, params.turn_sigma);
  double heading = uniform(rng, -std::numbers::pi, std::numbers::pi);
  const double step = params.speed * params.frame_dt;
  std::vector<TrajectoryState> out;
  out.reserve(num_frames);
  for (std::size_t k = 0; k < num_frames; ++k) {
    // Pick the heading for the segment leaving this frame.
    const double proposal = heading + turn(rng);
    double chosen = proposal;
    bool moved = step == 0.0;
    // Prefer headings with free space well ahead, then settle for one step.
    for (double reach : {std::max(step, params.lookahead), step}) {
      for (int i = 0; i <= 24 && !moved; ++i) {
        const int k_turn = (i + 1) / 2 * ((i % 2) ? 1 : -1);
        const double h = proposal + k_turn * (std::numbers::pi / 12.0);
        if (segment_free(x, y, x + reach * std::cos(h), y + reach * std::sin(h))) {
          chosen = h;
          moved = true;
        }
      }
    }
    TrajectoryState s;
    s.pose = PoseSE3::from_yaw(x, y, chosen);
    if (moved) {
      s.velocity = Eigen::Vector3d(params.speed * std::cos(chosen), params.speed * std::sin(chosen), 0.0);
      x += step * std::cos(chosen);
      y += step * std::sin(chosen);
    }
    heading = moved ? chosen : chosen + std::numbers::pi;
    out.push_back(s);
  }
  return out;
}

}  // namespace radarseg::sim
