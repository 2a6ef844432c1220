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

#include "radarseg/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"

namespace radarseg {

PoseSE3 PoseSE3::from_yaw(double x, double y, double yaw_rad, double z) {
  PoseSE3 p;
  p.rotation = Eigen::AngleAxisd(yaw_rad, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  p.translation = Eigen::Vector3d(x, y, z);
  return p;
}

double PoseSE3::yaw() const { return std::atan2(rotation(1, 0), rotation(0, 0)); }

void PoseSE3::validate() const {
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho <= 1e-9)) throw std::invalid_argument("pose rotation is not orthonormal");
  if (!(std::abs(rotation.determinant() - 1.0) <= 1e-9)) {
    throw std::invalid_argument("pose rotation determinant is not +1");
  }
  if (!translation.allFinite()) throw std::invalid_argument("pose translation is not finite");
}

std::size_t GridGeometry::range_bin(double range_m) const {
  const double b = std::floor(range_m / range_cell());
  return static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(rows - 1)));
}

std::size_t GridGeometry::azimuth_bin(double azimuth_deg) const {
  const double b = std::floor((azimuth_deg + fov_deg / 2.0) / azimuth_cell());
  return static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(cols - 1)));
}

double GridGeometry::column_center_deg(std::size_t col) const {
  return -fov_deg / 2.0 + (static_cast<double>(col) + 0.5) * azimuth_cell();
}

bool GridGeometry::in_view(double range_m, double azimuth_deg) const {
  return range_m >= 0.0 && range_m <= max_range && azimuth_deg >= -fov_deg / 2.0 &&
         azimuth_deg <= fov_deg / 2.0;
}

void write_pgm(const std::filesystem::path& path, const std::vector<std::uint8_t>& gray,
               std::size_t rows, std::size_t cols) {
  if (gray.size() != rows * cols) throw std::invalid_argument("PGM size mismatch");
  write_file_atomic(path, [&](std::ostream& out) {
    out << "P5\n" << cols << ' ' << rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
  });
}

std::vector<std::uint8_t> read_pgm(const std::filesystem::path& path, std::size_t& rows,
                                   std::size_t& cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic;
  std::size_t maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  if (magic != "P5" || maxval != 255 || rows == 0 || cols == 0) {
    throw DataError(path.string() + ": expected an 8-bit binary PGM");
  }
  in.get();  // single whitespace before the raster
  std::vector<std::uint8_t> gray(rows * cols);
  in.read(reinterpret_cast<char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
  if (!in) throw DataError(path.string() + ": truncated PGM raster");
  return gray;
}

}  // namespace radarseg
