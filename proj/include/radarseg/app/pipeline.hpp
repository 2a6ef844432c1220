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

#ifndef RADARSEG_APP_PIPELINE_HPP_
#define RADARSEG_APP_PIPELINE_HPP_

#include <filesystem>
#include <vector>

#include "radarseg/dataset.hpp"
#include "radarseg/labelgen.hpp"

namespace radarseg::app {

// Runs the LiDAR label pipeline sequence by sequence; one label per manifest
// frame, in manifest order.
std::vector<FovLabel> dataset_labels(const std::filesystem::path& dataset_dir,
                                     const sim::DatasetManifest& manifest,
                                     const labels::LabelParams& params, std::size_t jobs);

// label_%05d.pgm files written by write_labels. Throws DataError when one is
// missing.
std::vector<FovLabel> read_labels(const std::filesystem::path& labels_dir,
                                  const sim::DatasetManifest& manifest);

// The simulator's geometric free-space labels.
std::vector<FovLabel> geometric_labels(const std::filesystem::path& dataset_dir,
                                       const sim::DatasetManifest& manifest);

}  // namespace radarseg::app

#endif  // RADARSEG_APP_PIPELINE_HPP_
