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

#ifndef RADARSEG_APP_CONFIG_HPP_
#define RADARSEG_APP_CONFIG_HPP_

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "radarseg/dataset.hpp"
#include "radarseg/labelgen.hpp"
#include "radarseg/nn/train.hpp"

namespace radarseg::app {

struct EvalConfig {
  std::vector<double> thresholds = eval::default_thresholds();
  std::size_t num_bins = 8;
  std::size_t tau_pc = 1;  // radar points per cell for the point-cloud baseline
  dsp::CfarParams cfar;
  std::size_t panels = 4;  // triptychs written per evaluation
};

// Every pipeline setting. Sections: radar, scene, labelgen, model, loss,
// train, eval. Unknown keys and wrong types raise ConfigError.
struct RunConfig {
  sim::SimulationParams sim;
  std::size_t frames = 200;
  labels::LabelParams labels;
  nn::ModelConfig model;
  nn::InputMode input_mode = nn::InputMode::kRd;
  nn::LossConfig loss;
  nn::TrainConfig train;
  std::size_t val_modulus = 5;
  EvalConfig eval;

  // The document as given, kept for provenance.
  nlohmann::json source = nlohmann::json::object();

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);  // throws ConfigError
  nlohmann::json to_json() const;                            // every field, defaults filled
  void validate() const;
};

}  // namespace radarseg::app

#endif  // RADARSEG_APP_CONFIG_HPP_
