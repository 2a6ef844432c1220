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

#ifndef RADARSEG_SIMWORLD_HPP_
#define RADARSEG_SIMWORLD_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radarseg/geometry.hpp"
#include "radarseg/radar_dsp.hpp"

namespace radarseg::sim {

enum class SceneClass { kLab, kCorridor, kOpen, kTunnel };

inline constexpr SceneClass kAllSceneClasses[] = {SceneClass::kLab, SceneClass::kCorridor,
                                                  SceneClass::kOpen, SceneClass::kTunnel};

std::string to_string(SceneClass c);
// Throws std::invalid_argument for unknown names.
SceneClass scene_class_from_string(const std::string& name);

// Axis-aligned box: 2-D footprint plus a height range.
struct Box {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  double z_min = 0, z_max = 0;

  bool contains_xy(double x, double y, double margin = 0.0) const {
    return x >= x_min - margin && x <= x_max + margin && y >= y_min - margin &&
           y <= y_max + margin;
  }
};

struct WallSegment {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double z_min = 0, z_max = 0;
};

struct Scatterer {
  double x = 0, y = 0, z = 0;
  double reflectivity = 1.0;
};

// A 2.5-D room. When `bounded`, `room` is the interior volume and its faces
// are the walls, floor and ceiling.
struct Scene {
  SceneClass scene_class = SceneClass::kLab;
  bool bounded = true;
  Box room;
  std::vector<Box> obstacles;
  std::vector<Scatterer> scatterers;

  std::vector<WallSegment> walls() const;
  bool point_free(double x, double y, double clearance) const;
};

struct SceneParams {
  double length = 0.0;  // x extent; 0 picks a class-dependent random size
  double width = 0.0;   // y extent; 0 picks a class-dependent random size
  double height = 3.0;
  double scatterer_density = 50.0;  // points per metre of vertical face
};

// Deterministic in (scene_class, seed, params). Throws std::invalid_argument
// for rooms narrower than 2 m or when the obstacle layout cannot be placed.
Scene build_scene(SceneClass scene_class, std::uint64_t seed, const SceneParams& params = {});

// Appends scatterers along the walls and obstacle faces of `scene`.
void place_scatterers(Scene& scene, std::uint64_t seed, double density);

// First hit of a ray with the 2-D footprints (walls and obstacles). Returns
// the horizontal distance, or nullopt when nothing is hit.
std::optional<double> cast_ray_2d(const Scene& scene, double x, double y, double dir_x,
                                  double dir_y);

struct TrajectoryParams {
  double speed = 1.0;      // m/s
  double frame_dt = 0.5;   // s between frames
  double clearance = 0.4;  // m from any wall or obstacle
  double turn_sigma = 0.25;  // rad of heading noise per frame
  double lookahead = 1.5;    // m of free path wanted along the heading
};

struct TrajectoryState {
  PoseSE3 pose;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // world frame
};

// Smooth collision-free path with yaw along the direction of motion. Throws
// std::runtime_error when no free start can be found.
std::vector<TrajectoryState> trajectory(const Scene& scene, std::size_t num_frames,
                                        const TrajectoryParams& params, std::uint64_t seed);

struct LidarParams {
  std::size_t num_rings = 16;
  std::size_t num_beams = 1024;  // azimuth samples per ring
  double min_elevation_deg = -16.6;
  double max_elevation_deg = 16.6;
  double mount_height = 1.0;  // z of the optical centre in the body frame
  double noise_sigma = 0.02;  // m, along the beam
  // Relief of real surfaces (trim, shelving, pipes, rock). Returns are
  // spread uniformly from relief_protrusion in front of the nominal face to
  // relief_depth behind it. Zero keeps faces ideal.
  double relief_depth = 0.0;
  double relief_protrusion = 0.0;
  double max_range = 60.0;
};

// 360-degree multi-ring first-hit scan including floor and ceiling returns.
LidarFrame lidar_scan(const Scene& scene, const PoseSE3& pose, const LidarParams& params,
                      std::uint64_t seed);

struct EchoParams {
  double mount_height = 1.0;  // radar phase centre in the body frame
  // SNR of the strongest scatterer in the range-Doppler domain. nullopt
  // disables noise.
  std::optional<double> snr_db = 30.0;
};

struct VisibleScatterer {
  double range_m = 0;
  double azimuth_deg = 0;
  double radial_velocity = 0;  // range rate, positive when receding
  double amplitude = 0;
};

// Scatterers in range, in front of the sensor and not occluded.
std::vector<VisibleScatterer> visible_scatterers(const Scene& scene, const PoseSE3& pose,
                                                 const Eigen::Vector3d& velocity,
                                                 const dsp::RadarConfig& cfg,
                                                 const EchoParams& params);

// Sum of FMCW point-target returns with amplitude reflectivity / r^2 and a
// random phase per scatterer, plus complex white noise.
dsp::AdcCube radar_echo(const Scene& scene, const PoseSE3& pose,
                        const Eigen::Vector3d& velocity, const dsp::RadarConfig& cfg,
                        const EchoParams& params, std::uint64_t seed);

// Same, from an explicit target list (used by radar_echo and closed-loop tests).
dsp::AdcCube synthesize_echo(const std::vector<VisibleScatterer>& targets,
                             const dsp::RadarConfig& cfg, std::optional<double> snr_db,
                             std::uint64_t seed);

// Free-space label straight from the geometry: per column, rows before the
// first footprint hit along the column centre azimuth are 1.
FovLabel geometric_fov(const Scene& scene, const PoseSE3& pose, const GridGeometry& grid = {});

struct FrameRecord {
  std::size_t id = 0;
  PoseSE3 pose;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  LidarFrame lidar;
  dsp::AdcCube adc;
};

}  // namespace radarseg::sim

#endif  // RADARSEG_SIMWORLD_HPP_
