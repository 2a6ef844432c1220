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

#ifndef RADARSEG_DATASET_HPP_
#define RADARSEG_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "radarseg/simworld.hpp"

namespace radarseg::sim {

// Everything the synthetic collection run needs besides the seed.
struct SimulationParams {
  dsp::RadarConfig radar = dsp::default_radar_config();
  SceneParams scene;
  TrajectoryParams trajectory{.frame_dt = 0.25};
  LidarParams lidar{.num_beams = 2048, .relief_depth = 0.225, .relief_protrusion = 0.075};
  EchoParams echo;
  std::size_t sequence_length = 25;  // frames per simulated scene

  // Throws ConfigError.
  void validate() const;
};

struct FrameEntry {
  std::size_t id = 0;
  SceneClass scene_class = SceneClass::kLab;
  std::size_t sequence = 0;
  std::string adc, lidar, pose, gtlabel;
};

struct SequenceEntry {
  std::size_t sequence = 0;
  SceneClass scene_class = SceneClass::kLab;
  std::uint64_t scene_seed = 0;
  std::vector<std::size_t> frame_ids;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  dsp::RadarConfig radar;
  std::vector<FrameEntry> frames;
  std::vector<SequenceEntry> sequences;
  nlohmann::json config;  // echo of the run configuration
};

// Splits `total_frames` equally over the four scene classes and writes
// manifest.json plus adc_/lidar_/pose_/gtlabel_ files per frame. Throws
// ConfigError when total_frames is zero or not a multiple of four.
DatasetManifest simulate_dataset(const SimulationParams& params, const std::filesystem::path& dir,
                                 std::size_t total_frames, std::uint64_t seed, std::size_t jobs,
                                 const nlohmann::json& config_echo = nlohmann::json::object());

// Throws DataError for missing or malformed files.
DatasetManifest read_manifest(const std::filesystem::path& dir);

dsp::AdcCube load_adc(const std::filesystem::path& dir, const DatasetManifest& m,
                      const FrameEntry& f);
LidarFrame load_lidar(const std::filesystem::path& path);
void save_lidar(const std::filesystem::path& path, const LidarFrame& frame);
TrajectoryState load_pose(const std::filesystem::path& path);
void save_pose(const std::filesystem::path& path, const TrajectoryState& state);

}  // namespace radarseg::sim

#endif  // RADARSEG_DATASET_HPP_
