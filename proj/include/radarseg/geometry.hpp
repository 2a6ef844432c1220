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

#ifndef RADARSEG_GEOMETRY_HPP_
#define RADARSEG_GEOMETRY_HPP_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace radarseg {

// Rigid transform from the sensor body frame to the world frame. The body
// frame has x forward, y left, z up, with its origin on the floor directly
// under the sensor head.
struct PoseSE3 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static PoseSE3 from_yaw(double x, double y, double yaw_rad, double z = 0.0);

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Eigen::Vector3d apply_inverse(const Eigen::Vector3d& p) const {
    return rotation.transpose() * (p - translation);
  }
  double yaw() const;

  // Throws std::invalid_argument unless R^T R = I within 1e-9 and det R = +1.
  void validate() const;
};

struct LidarPoint {
  double x = 0, y = 0, z = 0;
  double intensity = 0;
};

// Points in the body frame.
struct LidarFrame {
  std::vector<LidarPoint> points;
};

// Polar bird's-eye grid: rows are range bins from 0 (nearest) outward,
// columns are azimuth bins from -fov/2 to +fov/2 (positive azimuth to the
// left, counter-clockwise from x).
struct GridGeometry {
  std::size_t rows = 128;
  std::size_t cols = 128;
  double max_range = 12.0;
  double fov_deg = 90.0;

  double range_cell() const { return max_range / static_cast<double>(rows); }
  double azimuth_cell() const { return fov_deg / static_cast<double>(cols); }
  // floor-binning with clamping into the grid.
  std::size_t range_bin(double range_m) const;
  std::size_t azimuth_bin(double azimuth_deg) const;
  double column_center_deg(std::size_t col) const;
  double row_start(std::size_t row) const { return static_cast<double>(row) * range_cell(); }
  bool in_view(double range_m, double azimuth_deg) const;

  bool operator==(const GridGeometry&) const = default;
};

// Binary row-major grid. The tag keeps occupancy grids and free-space
// labels from being mixed up.
template <typename Tag>
class BinaryGrid {
 public:
  BinaryGrid() : BinaryGrid(128, 128) {}
  BinaryGrid(std::size_t rows, std::size_t cols, std::uint8_t fill = 0)
      : rows_(rows), cols_(cols), cells_(rows * cols, fill) {
    if (fill > 1) throw std::invalid_argument("binary grid fill must be 0 or 1");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return cells_.size(); }

  std::uint8_t operator()(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, bool v) { cells_[r * cols_ + c] = v ? 1 : 0; }

  const std::vector<std::uint8_t>& cells() const { return cells_; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : cells_) n += v;
    return n;
  }

  bool operator==(const BinaryGrid&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint8_t> cells_;
};

using OccupancyGrid = BinaryGrid<struct OccupancyTag>;
using FovLabel = BinaryGrid<struct FovTag>;

// Every column reads 1...1 0...0 from row 0 outward.
template <typename Tag>
bool columns_monotone(const BinaryGrid<Tag>& g) {
  for (std::size_t c = 0; c < g.cols(); ++c) {
    for (std::size_t r = 1; r < g.rows(); ++r) {
      if (g(r, c) > g(r - 1, c)) return false;
    }
  }
  return true;
}

// Binary P5 PGM with 0/255 encoding, row 0 written first.
void write_pgm(const std::filesystem::path& path, const std::vector<std::uint8_t>& gray,
               std::size_t rows, std::size_t cols);
std::vector<std::uint8_t> read_pgm(const std::filesystem::path& path, std::size_t& rows,
                                   std::size_t& cols);

template <typename Tag>
void write_grid_pgm(const std::filesystem::path& path, const BinaryGrid<Tag>& g) {
  std::vector<std::uint8_t> gray(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) gray[i] = g.cells()[i] ? 255 : 0;
  write_pgm(path, gray, g.rows(), g.cols());
}

template <typename Tag>
BinaryGrid<Tag> read_grid_pgm(const std::filesystem::path& path) {
  std::size_t rows = 0, cols = 0;
  auto gray = read_pgm(path, rows, cols);
  BinaryGrid<Tag> g(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) g.set(r, c, gray[r * cols + c] >= 128);
  }
  return g;
}

}  // namespace radarseg

#endif  // RADARSEG_GEOMETRY_HPP_
