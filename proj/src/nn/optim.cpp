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

#include "radarseg/nn/optim.hpp"

#include <cmath>

#include "radarseg/errors.hpp"

namespace radarseg::nn {

void AdamConfig::validate() const {
  if (!(lr > 0)) throw ConfigError("train.lr must be > 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0)) throw ConfigError("Adam eps must be > 0");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw ConfigError("train.lr_decay must lie in (0, 1]");
}

double AdamConfig::lr_at_epoch(std::size_t epoch) const {
  return lr * std::pow(lr_decay, static_cast<double>(epoch));
}

Adam::Adam(std::vector<Param*> params, const AdamConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  for (const Param* p : params_) {
    m_.emplace_back(p->value.dims(), 0.0);
    v_.emplace_back(p->value.dims(), 0.0);
  }
}

void Adam::step(double lr) {
  for (const Param* p : params_) {
    for (double g : p->grad.values()) {
      if (!std::isfinite(g)) throw NumericalError("non-finite gradient in parameter " + p->name);
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t), c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& w = params_[k]->value.values();
    const auto& g = params_[k]->grad.values();
    auto& m = m_[k].values();
    auto& v = v_[k].values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
    }
  }
}

}  // namespace radarseg::nn
