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

#ifndef RADARSEG_NN_UNET_HPP_
#define RADARSEG_NN_UNET_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "radarseg/nn/layers.hpp"

namespace radarseg::nn {

enum class Attention { kSpatial, kChannel, kNone };

std::string to_string(Attention a);
// Throws ConfigError for unknown names.
Attention attention_from_string(const std::string& name);

struct ModelConfig {
  std::size_t in_channels = 24;
  std::size_t base_channels = 16;
  std::size_t depth = 3;
  Attention attention = Attention::kSpatial;
  std::size_t attention_kernel = 7;
  std::size_t channel_reduction = 4;

  // Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// conv 3x3 -> instance norm -> attention -> ReLU
class ConvUnit {
 public:
  ConvUnit(const std::string& name, std::size_t in, std::size_t out, const ModelConfig& cfg);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);

 private:
  Conv2d conv_;
  InstanceNorm2d norm_;
  std::optional<SpatialAttention> spatial_;
  std::optional<ChannelAttention> channel_;
  ReLU relu_;
};

class DoubleConv {
 public:
  DoubleConv(const std::string& name, std::size_t in, std::size_t out, const ModelConfig& cfg);

  Tensor forward(const Tensor& x) { return second_.forward(first_.forward(x)); }
  Tensor backward(const Tensor& dy) { return first_.backward(second_.backward(dy)); }
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);

 private:
  ConvUnit first_, second_;
};

// 2x2 average pool, then a double conv from `in` to 2 * in channels.
class DownBlock {
 public:
  DownBlock(const std::string& name, std::size_t in, const ModelConfig& cfg);

  Tensor forward(const Tensor& x) { return conv_.forward(pool_.forward(x)); }
  Tensor backward(const Tensor& dy) { return pool_.backward(conv_.backward(dy)); }
  void init(std::mt19937_64& rng) { conv_.init(rng); }
  void collect(std::vector<Param*>& out) { conv_.collect(out); }

 private:
  AvgPool2 pool_;
  DoubleConv conv_;
};

// Transpose conv from `in` to in / 2 channels at twice the resolution,
// concatenation with the encoder skip (in / 2 channels), double conv back to
// in / 2.
class UpBlock {
 public:
  UpBlock(const std::string& name, std::size_t in, const ModelConfig& cfg);

  // Throws std::invalid_argument when the skip does not match the upsampled map.
  Tensor forward(const Tensor& x, const Tensor& skip);
  // Returns the gradient for x; the skip gradient goes to `dskip`.
  Tensor backward(const Tensor& dy, Tensor& dskip);
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);

  ConvTranspose2x2& up() { return up_; }

 private:
  std::size_t in_;
  ConvTranspose2x2 up_;
  DoubleConv conv_;
};

class UNet {
 public:
  explicit UNet(const ModelConfig& cfg);
  UNet(const UNet&) = delete;
  UNet& operator=(const UNet&) = delete;

  // Kaiming-uniform convolutions, zero biases, unit norm scales.
  void init(std::uint64_t seed);

  // [B, in_channels, H, W] -> probabilities [B, H, W]. H and W must be
  // divisible by 2^depth. Throws std::invalid_argument otherwise.
  Tensor forward(const Tensor& x);
  // Gradient of the loss with respect to the probabilities, [B, H, W].
  // Accumulates parameter gradients.
  void backward(const Tensor& dprob);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<Param*>& params() const { return params_; }
  std::size_t parameter_count() const;
  void zero_grad();

 private:
  ModelConfig cfg_;
  DoubleConv inc_;
  std::vector<std::unique_ptr<DownBlock>> downs_;
  std::vector<std::unique_ptr<UpBlock>> ups_;
  Conv2d head_;
  Sigmoid out_;
  std::vector<Param*> params_;
};

// Checkpoint: "RCKP" magic, u64 header length, JSON header (model config,
// parameter names and shapes, caller metadata), then one RTEN record per
// parameter in header order.
void save_checkpoint(const std::filesystem::path& path, const UNet& net,
                     const nlohmann::json& metadata);

struct Checkpoint {
  ModelConfig config;
  nlohmann::json metadata;
  std::unique_ptr<UNet> net;
};

// Throws DataError for missing, truncated or inconsistent files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace radarseg::nn

#endif  // RADARSEG_NN_UNET_HPP_
