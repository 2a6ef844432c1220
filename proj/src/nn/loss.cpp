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

#include "radarseg/nn/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "radarseg/errors.hpp"

namespace radarseg::nn {

void LossConfig::validate() const {
  if (!(bce_weight >= 0) || !(dice_weight >= 0) || bce_weight + dice_weight <= 0) {
    throw ConfigError("loss weights must be >= 0 and not both zero");
  }
  if (!(dice_epsilon >= 0)) throw ConfigError("loss.dice_epsilon must be >= 0");
  if (!(clamp > 0 && clamp < 0.5)) throw ConfigError("loss clamp must lie in (0, 0.5)");
}

LossValue seg_loss(const Tensor& pred, const Tensor& label, const LossConfig& cfg) {
  if (pred.dims() != label.dims()) {
    throw std::invalid_argument("seg_loss: prediction " + shape_to_string(pred.dims()) +
                                " and label " + shape_to_string(label.dims()) + " differ");
  }
  const std::size_t n = pred.size();
  const double lo = cfg.clamp, hi = 1.0 - cfg.clamp;
  LossValue out;
  out.grad = Tensor(pred.dims(), 0.0);
  double inter = 0, sum_y2 = 0, sum_p2 = 0, bce = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = label[i], p = pred[i];
    const double pc = std::min(std::max(p, lo), hi);
    bce -= y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc);
    if (p > lo && p < hi) out.grad[i] = cfg.bce_weight * (pc - y) / (pc * (1.0 - pc)) / double(n);
    inter += y * p;
    sum_y2 += y * y;
    sum_p2 += p * p;
  }
  out.bce = bce / double(n);
  const double num = 2.0 * inter + cfg.dice_epsilon, den = sum_y2 + sum_p2 + cfg.dice_epsilon;
  out.dice = den > 0 ? 1.0 - num / den : 0.0;
  if (den > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      out.grad[i] -= cfg.dice_weight * (2.0 * label[i] * den - num * 2.0 * pred[i]) / (den * den);
    }
  }
  out.total = cfg.bce_weight * out.bce + cfg.dice_weight * out.dice;
  return out;
}

}  // namespace radarseg::nn
