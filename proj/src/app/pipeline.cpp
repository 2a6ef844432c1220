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

#include "radarseg/app/pipeline.hpp"

#include <map>

#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"

namespace radarseg::app {

std::vector<FovLabel> dataset_labels(const std::filesystem::path& dataset_dir,
                                     const sim::DatasetManifest& manifest,
                                     const labels::LabelParams& params, std::size_t jobs) {
  std::map<std::size_t, std::size_t> index;
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) index[manifest.frames[i].id] = i;
  std::vector<FovLabel> out(manifest.frames.size(), FovLabel(params.grid.rows, params.grid.cols));
  for (const auto& seq : manifest.sequences) {
    std::vector<LidarFrame> frames;
    std::vector<PoseSE3> poses;
    for (std::size_t id : seq.frame_ids) {
      const auto it = index.find(id);
      if (it == index.end()) throw DataError("sequence lists unknown frame " + std::to_string(id));
      const auto& f = manifest.frames[it->second];
      frames.push_back(sim::load_lidar(dataset_dir / f.lidar));
      poses.push_back(sim::load_pose(dataset_dir / f.pose).pose);
    }
    const auto labels = labels::generate_labels(frames, poses, params, jobs);
    for (std::size_t k = 0; k < seq.frame_ids.size(); ++k) {
      out[index.at(seq.frame_ids[k])] = labels[k];
    }
  }
  return out;
}

std::vector<FovLabel> read_labels(const std::filesystem::path& labels_dir,
                                  const sim::DatasetManifest& manifest) {
  std::vector<FovLabel> out;
  for (const auto& f : manifest.frames) {
    const auto path = labels_dir / frame_file("label_", f.id, ".pgm");
    if (!std::filesystem::exists(path)) throw DataError("missing label " + path.string());
    out.push_back(read_grid_pgm<FovTag>(path));
  }
  return out;
}

std::vector<FovLabel> geometric_labels(const std::filesystem::path& dataset_dir,
                                       const sim::DatasetManifest& manifest) {
  std::vector<FovLabel> out;
  for (const auto& f : manifest.frames) {
    const auto path = dataset_dir / f.gtlabel;
    if (!std::filesystem::exists(path)) throw DataError("missing label " + path.string());
    out.push_back(read_grid_pgm<FovTag>(path));
  }
  return out;
}

}  // namespace radarseg::app
