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

#ifndef RADARSEG_NN_TRAIN_HPP_
#define RADARSEG_NN_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "radarseg/dataset.hpp"
#include "radarseg/eval.hpp"
#include "radarseg/nn/loss.hpp"
#include "radarseg/nn/optim.hpp"
#include "radarseg/nn/unet.hpp"

namespace radarseg::nn {

enum class InputMode { kAdc, kRa, kRd };

std::string to_string(InputMode m);
// Throws ConfigError for unknown names.
InputMode input_mode_from_string(const std::string& name);

// [2C, L, N] real tensor: real parts in channels 0..C-1, imaginary parts in
// C..2C-1. kAdc uses the raw cube, kRd the range-Doppler cube, kRa the
// angle-Doppler-range cube.
RealTensor model_input(const dsp::AdcCube& cube, InputMode mode);

struct Sample {
  std::size_t id = 0;
  sim::SceneClass scene_class = sim::SceneClass::kLab;
  std::vector<float> input;  // model_input scaled to unit RMS
  FovLabel label{128, 128};
};

struct SampleSet {
  Shape input_shape;  // [channels, height, width]
  std::vector<Sample> samples;
};

// Loads every manifest frame in `mode`, paired with labels[i] for frame i.
// Frames are processed on `jobs` workers; the result is in manifest order.
// Throws DataError when the label count differs from the frame count.
SampleSet load_samples(const std::filesystem::path& dataset_dir,
                       const sim::DatasetManifest& manifest, std::span<const FovLabel> labels,
                       InputMode mode, std::size_t jobs);

// Frames whose id % modulus == modulus - 1 go to validation.
void split_train_val(const SampleSet& all, SampleSet& train, SampleSet& val,
                     std::size_t modulus = 5);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  AdamConfig adam;
  std::uint64_t seed = 0;  // init and shuffling

  // Throws ConfigError.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double val_loss = 0;
  double val_iou = 0;  // mean per-sample IoU at threshold 0.5
  double lr = 0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t optimizer_steps = 0;
  double seconds = 0;
};

inline constexpr const char* kHistoryCsvHeader = "epoch,train_loss,val_loss,val_iou";

// Trains `net` in place. With a non-empty out_dir, history.csv and
// checkpoint.rckp are rewritten after every epoch. Throws NumericalError
// naming the epoch and batch on a non-finite loss.
TrainResult train(UNet& net, const SampleSet& train_set, const SampleSet& val_set,
                  const TrainConfig& cfg, const LossConfig& loss_cfg,
                  const std::filesystem::path& out_dir = {},
                  const nlohmann::json& config_echo = nlohmann::json::object(),
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> rows);

// Probability maps for every sample, in order.
std::vector<eval::ProbabilityMap> predict(UNet& net, const SampleSet& set,
                                          std::size_t batch_size = 16);

// Assembles samples [first, first + count) of `set` into [count, C, H, W].
Tensor make_batch(const SampleSet& set, std::span<const std::size_t> order, std::size_t first,
                  std::size_t count, Tensor* labels = nullptr);

}  // namespace radarseg::nn

#endif  // RADARSEG_NN_TRAIN_HPP_
