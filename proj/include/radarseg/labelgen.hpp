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
#ifndef RADARSEG_LABELGEN_HPP_
#define RADARSEG_LABELGEN_HPP_

#include <Eigen/Core>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "radarseg/geometry.hpp"

namespace radarseg::labels {

// Height band and intensity gate, in the sensor body frame.
struct FilterParams {
  double z_min = 0.2;
  double z_max = 2.0;
  double intensity_min = 0.0;

  void validate() const;
};

struct Point2 {
  double x = 0, y = 0;
};

// Flattened map points in the world frame.
struct GlobalCloud {
  std::vector<Point2> points;
};

struct PolarPoint {
  double range_m = 0;
  double azimuth_deg = 0;
};

// Keeps z_min <= z <= z_max and intensity >= intensity_min, in order.
LidarFrame filter_points(const LidarFrame& frame, const FilterParams& fp);

// Filters frames 0, s, 2s, ... and maps their points into the world frame.
// Throws std::invalid_argument on a count mismatch or stride outside [2, 10].
GlobalCloud accumulate_global(std::span<const LidarFrame> frames,
                              std::span<const PoseSE3> poses, std::size_t stride,
                              const FilterParams& fp);

// Map points seen from the given pose, restricted to the grid span.
std::vector<PolarPoint> to_polar_ram(const GlobalCloud& cloud, const PoseSE3& pose,
                                     const GridGeometry& grid = {});

// Per-cell point counts, row-major.
std::vector<std::size_t> cell_counts(std::span<const PolarPoint> points,
                                     const GridGeometry& grid = {});

// Cell is occupied when it holds at least tau points. Throws for tau < 1.
OccupancyGrid rasterize_occupancy(std::span<const PolarPoint> points, std::size_t tau,
                                  const GridGeometry& grid = {});

// 3x3 binary erosion; cells beyond the border count as empty.
OccupancyGrid erode(const OccupancyGrid& grid, std::size_t iterations = 1);

// Per column, rows before the first occupied row are free.
FovLabel fov_label(const OccupancyGrid& grid);

// Marks each column's first obstructed row, i.e. the boundary of the label.
OccupancyGrid obstacles_from_label(const FovLabel& label);

struct LabelQc {
  double free_fraction = 0;
  bool monotone_ok = false;
};

LabelQc label_qc(const FovLabel& label);

struct LabelParams {
  FilterParams filter;
  std::size_t stride = 2;
  std::size_t tau = 3;
  std::size_t erosion_iterations = 1;
  GridGeometry grid;

  void validate() const;
};

// Whole pipeline for one sequence: one global map, then a label per pose.
std::vector<FovLabel> generate_labels(std::span<const LidarFrame> frames,
                                      std::span<const PoseSE3> poses, const LabelParams& params,
                                      std::size_t jobs = 1);

// Writes label_%05d.pgm per frame id plus labels_manifest.json.
void write_labels(const std::filesystem::path& dir, std::span<const std::size_t> ids,
                  std::span<const FovLabel> labels);

}  // namespace radarseg::labels

#endif  // RADARSEG_LABELGEN_HPP_
