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

#ifndef RADARSEG_NN_LOSS_HPP_
#define RADARSEG_NN_LOSS_HPP_

#include "radarseg/nn/layers.hpp"

namespace radarseg::nn {

struct LossConfig {
  double bce_weight = 0.5;
  double dice_weight = 0.5;
  double dice_epsilon = 1.0;
  double clamp = 1e-7;  // predictions clamped to [clamp, 1 - clamp] inside BCE

  // Throws ConfigError.
  void validate() const;
};

struct LossValue {
  double total = 0;
  double bce = 0;
  double dice = 0;
  Tensor grad;  // d total / d pred, same shape as pred
};

// Weighted sum of mean binary cross-entropy and batch-aggregated soft Dice
// 1 - (2 sum(y p) + eps) / (sum(y^2) + sum(p^2) + eps). Throws
// std::invalid_argument when the shapes differ.
LossValue seg_loss(const Tensor& pred, const Tensor& label, const LossConfig& cfg = {});

}  // namespace radarseg::nn

#endif  // RADARSEG_NN_LOSS_HPP_
