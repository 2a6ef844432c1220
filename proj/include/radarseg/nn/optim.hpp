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

#ifndef RADARSEG_NN_OPTIM_HPP_
#define RADARSEG_NN_OPTIM_HPP_

#include <cstddef>
#include <vector>

#include "radarseg/nn/layers.hpp"

namespace radarseg::nn {

struct AdamConfig {
  double lr = 0.000314;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr_decay = 0.95;  // multiplied in once per finished epoch

  // Throws ConfigError.
  void validate() const;
  double lr_at_epoch(std::size_t epoch) const;  // epoch counts from 0
};

class Adam {
 public:
  Adam(std::vector<Param*> params, const AdamConfig& cfg);

  // One bias-corrected update with the given learning rate. Throws
  // NumericalError naming the parameter when a gradient is not finite; no
  // parameter is changed in that case.
  void step(double lr);

  std::size_t steps() const { return steps_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  std::vector<Param*> params_;
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  std::size_t steps_ = 0;
};

}  // namespace radarseg::nn

#endif  // RADARSEG_NN_OPTIM_HPP_
