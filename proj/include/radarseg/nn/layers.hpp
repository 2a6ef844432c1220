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

#ifndef RADARSEG_NN_LAYERS_HPP_
#define RADARSEG_NN_LAYERS_HPP_

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "radarseg/tensor.hpp"

namespace radarseg::nn {

// [batch, channels, height, width] in 64-bit floats.
using Tensor = RealTensor;

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param(std::string n, Shape dims) : name(std::move(n)), value(dims, 0.0), grad(dims, 0.0) {}
};

// Throws std::invalid_argument unless `t` has rank 4.
void require_bchw(const Tensor& t, const char* what);

// Layers cache what backward needs during forward. backward() adds into the
// parameter gradients and returns the gradient for the input of the most
// recent forward call.

class Conv2d {
 public:
  // Stride 1 cross-correlation with zero padding.
  Conv2d(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
         std::size_t pad, bool bias = true);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void init(std::mt19937_64& rng);  // Kaiming-uniform over fan-in, zero bias
  void collect(std::vector<Param*>& out);

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }

  Param weight;  // [out, in, k, k]
  Param bias;    // [out]; unused when constructed without bias

 private:
  std::size_t in_, out_, k_, pad_;
  bool has_bias_;
  Tensor x_;
};

// Kernel 2, stride 2: every input pixel expands into a 2x2 output patch.
class ConvTranspose2x2 {
 public:
  ConvTranspose2x2(std::string name, std::size_t in_channels, std::size_t out_channels);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);

  Param weight;  // [in, out, 2, 2]
  Param bias;    // [out]

 private:
  std::size_t in_, out_;
  Tensor x_;
};

class InstanceNorm2d {
 public:
  InstanceNorm2d(std::string name, std::size_t channels, double eps = 1e-5);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void collect(std::vector<Param*>& out);

  Param scale;  // [channels], starts at 1
  Param shift;  // [channels], starts at 0

 private:
  std::size_t channels_;
  double eps_;
  Tensor xhat_;
  std::vector<double> inv_std_;
};

// Channel-wise max and mean maps, k x k convolution, sigmoid gate applied to
// every channel.
class SpatialAttention {
 public:
  SpatialAttention(std::string name, std::size_t kernel = 7);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void init(std::mt19937_64& rng) { conv_.init(rng); }
  void collect(std::vector<Param*>& out) { conv_.collect(out); }

  // Gate of the last forward pass, [batch, 1, height, width].
  const Tensor& gate() const { return gate_; }

 private:
  Conv2d conv_;
  Tensor x_, gate_;
  std::vector<std::size_t> argmax_;
};

// Average- and max-pooled channel descriptors through a shared two-layer
// bottleneck, summed, sigmoid gate per channel.
class ChannelAttention {
 public:
  // Throws std::invalid_argument unless reduction divides channels.
  ChannelAttention(std::string name, std::size_t channels, std::size_t reduction = 4);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);
  void init(std::mt19937_64& rng);
  void collect(std::vector<Param*>& out);

  const Tensor& gate() const { return gate_; }  // [batch, channels]

  Param fc1;  // [hidden, channels]
  Param fc2;  // [channels, hidden]

 private:
  std::size_t channels_, hidden_;
  Tensor x_, gate_;
  std::vector<double> avg_, max_, za_, zm_;  // per batch
  std::vector<std::size_t> argmax_;
};

class AvgPool2 {
 public:
  // Throws std::invalid_argument for odd height or width.
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  Shape in_dims_;
};

class ReLU {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  std::vector<bool> active_;
};

class Sigmoid {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  Tensor y_;
};

double sigmoid(double x);

// Channel concatenation and its inverse.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& t, std::size_t first, Tensor& a, Tensor& b);

}  // namespace radarseg::nn

#endif  // RADARSEG_NN_LAYERS_HPP_
