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

#include "radarseg/labelgen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "radarseg/io.hpp"
#include "radarseg/parallel.hpp"

namespace radarseg::labels {

void FilterParams::validate() const {
  if (!(z_min < z_max)) throw std::invalid_argument("filter needs z_min < z_max");
  if (!std::isfinite(intensity_min)) throw std::invalid_argument("intensity_min must be finite");
}

void LabelParams::validate() const {
  filter.validate();
  if (stride < 2 || stride > 10) throw std::invalid_argument("label stride must be in [2, 10]");
  if (tau < 1) throw std::invalid_argument("occupancy threshold tau must be >= 1");
  if (grid.rows == 0 || grid.cols == 0 || !(grid.max_range > 0) || !(grid.fov_deg > 0)) {
    throw std::invalid_argument("degenerate label grid");
  }
}

LidarFrame filter_points(const LidarFrame& frame, const FilterParams& fp) {
  LidarFrame out;
  for (const auto& p : frame.points) {
    if (p.z >= fp.z_min && p.z <= fp.z_max && p.intensity >= fp.intensity_min) {
      out.points.push_back(p);
    }
  }
  return out;
}

GlobalCloud accumulate_global(std::span<const LidarFrame> frames,
                              std::span<const PoseSE3> poses, std::size_t stride,
                              const FilterParams& fp) {
  if (frames.size() != poses.size()) {
    throw std::invalid_argument("accumulate_global: frame and pose counts differ");
  }
  if (stride < 2 || stride > 10) throw std::invalid_argument("stride must be in [2, 10]");
  fp.validate();
  GlobalCloud cloud;
  for (std::size_t k = 0; k < frames.size(); k += stride) {
    poses[k].validate();
    for (const auto& p : filter_points(frames[k], fp).points) {
      const Eigen::Vector3d w = poses[k].apply(Eigen::Vector3d(p.x, p.y, p.z));
      cloud.points.push_back({w.x(), w.y()});
    }
  }
  return cloud;
}

std::vector<PolarPoint> to_polar_ram(const GlobalCloud& cloud, const PoseSE3& pose,
                                     const GridGeometry& grid) {
  std::vector<PolarPoint> out;
  const double half = grid.fov_deg / 2.0;
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d b =
        pose.apply_inverse(Eigen::Vector3d(p.x, p.y, pose.translation.z()));
    const double r = std::hypot(b.x(), b.y());
    const double az = std::atan2(b.y(), b.x()) * 180.0 / std::numbers::pi;
    if (r > grid.max_range || az < -half || az > half) continue;
    out.push_back({r, az});
  }
  return out;
}

std::vector<std::size_t> cell_counts(std::span<const PolarPoint> points,
                                     const GridGeometry& grid) {
  std::vector<std::size_t> counts(grid.rows * grid.cols, 0);
  for (const auto& p : points) {
    ++counts[grid.range_bin(p.range_m) * grid.cols + grid.azimuth_bin(p.azimuth_deg)];
  }
  return counts;
}

OccupancyGrid rasterize_occupancy(std::span<const PolarPoint> points, std::size_t tau,
                                  const GridGeometry& grid) {
  if (tau < 1) throw std::invalid_argument("occupancy threshold tau must be >= 1");
  const auto counts = cell_counts(points, grid);
  OccupancyGrid g(grid.rows, grid.cols);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.cols; ++c) g.set(r, c, counts[r * grid.cols + c] >= tau);
  }
  return g;
}

OccupancyGrid erode(const OccupancyGrid& grid, std::size_t iterations) {
  OccupancyGrid cur = grid;
  const std::size_t R = grid.rows(), C = grid.cols();
  for (std::size_t it = 0; it < iterations; ++it) {
    OccupancyGrid next(R, C);
    for (std::size_t r = 1; r + 1 < R; ++r) {
      for (std::size_t c = 1; c + 1 < C; ++c) {
        bool keep = true;
        for (std::size_t rr = r - 1; rr <= r + 1 && keep; ++rr) {
          for (std::size_t cc = c - 1; cc <= c + 1 && keep; ++cc) keep = cur(rr, cc) != 0;
        }
        next.set(r, c, keep);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

FovLabel fov_label(const OccupancyGrid& grid) {
  FovLabel label(grid.rows(), grid.cols());
  for (std::size_t c = 0; c < grid.cols(); ++c) {
    for (std::size_t r = 0; r < grid.rows() && !grid(r, c); ++r) label.set(r, c, true);
  }
  return label;
}

OccupancyGrid obstacles_from_label(const FovLabel& label) {
  OccupancyGrid g(label.rows(), label.cols());
  for (std::size_t c = 0; c < label.cols(); ++c) {
    for (std::size_t r = 0; r < label.rows(); ++r) {
      if (!label(r, c)) {
        g.set(r, c, true);
        break;
      }
    }
  }
  return g;
}

LabelQc label_qc(const FovLabel& label) {
  return {static_cast<double>(label.count()) / static_cast<double>(label.size()),
          columns_monotone(label)};
}

std::vector<FovLabel> generate_labels(std::span<const LidarFrame> frames,
                                      std::span<const PoseSE3> poses, const LabelParams& params,
                                      std::size_t jobs) {
  params.validate();
  const GlobalCloud cloud = accumulate_global(frames, poses, params.stride, params.filter);
  std::vector<FovLabel> labels(poses.size());
  parallel_for(poses.size(), jobs, [&](std::size_t k) {
    const auto polar = to_polar_ram(cloud, poses[k], params.grid);
    const auto occ = rasterize_occupancy(polar, params.tau, params.grid);
    labels[k] = fov_label(erode(occ, params.erosion_iterations));
  });
  return labels;
}

void write_labels(const std::filesystem::path& dir, std::span<const std::size_t> ids,
                  std::span<const FovLabel> labels) {
  if (ids.size() != labels.size()) throw std::invalid_argument("label and id counts differ");
  std::filesystem::create_directories(dir);
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::string name = frame_file("label_", ids[i], ".pgm");
    write_grid_pgm(dir / name, labels[i]);
    const LabelQc qc = label_qc(labels[i]);
    entries.push_back({{"id", ids[i]},
                       {"file", name},
                       {"free_fraction", qc.free_fraction},
                       {"monotone_ok", qc.monotone_ok}});
  }
  nlohmann::json manifest = {{"rows", labels.empty() ? 0 : labels[0].rows()},
                             {"cols", labels.empty() ? 0 : labels[0].cols()},
                             {"row0", "nearest range"},
                             {"frames", entries}};
  write_text_atomic(dir / "labels_manifest.json", manifest.dump(2) + "\n");
}

}  // namespace radarseg::labels
