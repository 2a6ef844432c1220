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

#include "radarseg/nn/unet.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"

namespace radarseg::nn {

std::string to_string(Attention a) {
  switch (a) {
    case Attention::kSpatial: return "spatial";
    case Attention::kChannel: return "channel";
    case Attention::kNone: return "none";
  }
  return "none";
}

Attention attention_from_string(const std::string& name) {
  if (name == "spatial") return Attention::kSpatial;
  if (name == "channel") return Attention::kChannel;
  if (name == "none") return Attention::kNone;
  throw ConfigError("unknown attention '" + name + "' (expected spatial, channel or none)");
}

void ModelConfig::validate() const {
  if (depth != 3) throw ConfigError("model.depth must be 3");
  if (base_channels < 4) throw ConfigError("model.base_channels must be >= 4");
  if (in_channels < 1) throw ConfigError("model.in_channels must be >= 1");
  if (attention_kernel % 2 == 0) throw ConfigError("model.attention_kernel must be odd");
  if (channel_reduction == 0 || base_channels % channel_reduction != 0) {
    throw ConfigError("model.channel_reduction must divide base_channels");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"in_channels", in_channels},
          {"base_channels", base_channels},
          {"depth", depth},
          {"attention", to_string(attention)},
          {"attention_kernel", attention_kernel},
          {"channel_reduction", channel_reduction}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.in_channels = j.at("in_channels").get<std::size_t>();
    c.base_channels = j.at("base_channels").get<std::size_t>();
    c.depth = j.at("depth").get<std::size_t>();
    c.attention = attention_from_string(j.at("attention").get<std::string>());
    c.attention_kernel = j.at("attention_kernel").get<std::size_t>();
    c.channel_reduction = j.value("channel_reduction", std::size_t{4});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model config: ") + e.what());
  }
  c.validate();
  return c;
}

ConvUnit::ConvUnit(const std::string& name, std::size_t in, std::size_t out,
                   const ModelConfig& cfg)
    : conv_(name + ".conv", in, out, 3, 1), norm_(name + ".norm", out) {
  if (cfg.attention == Attention::kSpatial) spatial_.emplace(name + ".sa", cfg.attention_kernel);
  if (cfg.attention == Attention::kChannel) {
    channel_.emplace(name + ".ca", out, cfg.channel_reduction);
  }
}

Tensor ConvUnit::forward(const Tensor& x) {
  Tensor t = norm_.forward(conv_.forward(x));
  if (spatial_) t = spatial_->forward(t);
  if (channel_) t = channel_->forward(t);
  return relu_.forward(t);
}

Tensor ConvUnit::backward(const Tensor& dy) {
  Tensor g = relu_.backward(dy);
  if (spatial_) g = spatial_->backward(g);
  if (channel_) g = channel_->backward(g);
  return conv_.backward(norm_.backward(g));
}

void ConvUnit::init(std::mt19937_64& rng) {
  conv_.init(rng);
  if (spatial_) spatial_->init(rng);
  if (channel_) channel_->init(rng);
}

void ConvUnit::collect(std::vector<Param*>& out) {
  conv_.collect(out);
  norm_.collect(out);
  if (spatial_) spatial_->collect(out);
  if (channel_) channel_->collect(out);
}

DoubleConv::DoubleConv(const std::string& name, std::size_t in, std::size_t out,
                       const ModelConfig& cfg)
    : first_(name + ".0", in, out, cfg), second_(name + ".1", out, out, cfg) {}

void DoubleConv::init(std::mt19937_64& rng) {
  first_.init(rng);
  second_.init(rng);
}

void DoubleConv::collect(std::vector<Param*>& out) {
  first_.collect(out);
  second_.collect(out);
}

DownBlock::DownBlock(const std::string& name, std::size_t in, const ModelConfig& cfg)
    : conv_(name, in, 2 * in, cfg) {}

UpBlock::UpBlock(const std::string& name, std::size_t in, const ModelConfig& cfg)
    : in_(in), up_(name + ".up", in, in / 2), conv_(name, in, in / 2, cfg) {}

Tensor UpBlock::forward(const Tensor& x, const Tensor& skip) {
  const Tensor u = up_.forward(x);
  if (skip.rank() != 4 || skip.dims() != u.dims()) {
    throw std::invalid_argument("up block: skip " + shape_to_string(skip.dims()) +
                                " does not match upsampled " + shape_to_string(u.dims()));
  }
  return conv_.forward(concat_channels(u, skip));
}

Tensor UpBlock::backward(const Tensor& dy, Tensor& dskip) {
  Tensor du;
  split_channels(conv_.backward(dy), in_ / 2, du, dskip);
  return up_.backward(du);
}

void UpBlock::init(std::mt19937_64& rng) {
  up_.init(rng);
  conv_.init(rng);
}

void UpBlock::collect(std::vector<Param*>& out) {
  up_.collect(out);
  conv_.collect(out);
}

namespace {

const ModelConfig& validated(const ModelConfig& c) {
  c.validate();
  return c;
}

}  // namespace

UNet::UNet(const ModelConfig& cfg)
    : cfg_(validated(cfg)),
      inc_("inc", cfg.in_channels, cfg.base_channels, cfg),
      head_("head", cfg.base_channels, 1, 1, 0) {
  std::size_t c = cfg.base_channels;
  for (std::size_t i = 0; i < cfg.depth; ++i, c *= 2) {
    downs_.push_back(std::make_unique<DownBlock>("down" + std::to_string(i + 1), c, cfg));
  }
  for (std::size_t i = 0; i < cfg.depth; ++i, c /= 2) {
    ups_.push_back(std::make_unique<UpBlock>("up" + std::to_string(i + 1), c, cfg));
  }
  inc_.collect(params_);
  for (auto& d : downs_) d->collect(params_);
  for (auto& u : ups_) u->collect(params_);
  head_.collect(params_);
}

void UNet::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  inc_.init(rng);
  for (auto& d : downs_) d->init(rng);
  for (auto& u : ups_) u->init(rng);
  head_.init(rng);
}

Tensor UNet::forward(const Tensor& x) {
  require_bchw(x, "unet");
  const std::size_t m = std::size_t{1} << cfg_.depth;
  if (x.extent(1) != cfg_.in_channels || x.extent(2) % m || x.extent(3) % m) {
    throw std::invalid_argument("unet: expected [B, " + std::to_string(cfg_.in_channels) +
                                ", H, W] with H and W divisible by " + std::to_string(m) +
                                ", got " + shape_to_string(x.dims()));
  }
  std::vector<Tensor> skips;
  Tensor t = inc_.forward(x);
  for (auto& d : downs_) {
    skips.push_back(t);
    t = d->forward(t);
  }
  for (auto& u : ups_) {
    t = u->forward(t, skips.back());
    skips.pop_back();
  }
  const Tensor p = out_.forward(head_.forward(t));
  return p.reshaped({x.extent(0), x.extent(2), x.extent(3)});
}

void UNet::backward(const Tensor& dprob) {
  if (dprob.rank() != 3) throw std::invalid_argument("unet backward: expected [B, H, W]");
  Tensor g = head_.backward(out_.backward(
      dprob.reshaped({dprob.extent(0), 1, dprob.extent(1), dprob.extent(2)})));
  std::vector<Tensor> dskips;
  for (auto it = ups_.rbegin(); it != ups_.rend(); ++it) {
    Tensor ds;
    g = (*it)->backward(g, ds);
    dskips.push_back(std::move(ds));
  }
  // The last up block consumed the first skip, so dskips[i] is the gradient
  // of the input of down block i.
  for (std::size_t i = downs_.size(); i-- > 0;) {
    g = downs_[i]->backward(g);
    const Tensor& ds = dskips[i];
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += ds[k];
  }
  inc_.backward(g);
}

std::size_t UNet::parameter_count() const {
  std::size_t n = 0;
  for (const Param* p : params_) n += p->value.size();
  return n;
}

void UNet::zero_grad() {
  for (Param* p : params_) std::fill(p->grad.values().begin(), p->grad.values().end(), 0.0);
}

namespace {

constexpr char kMagic[4] = {'R', 'C', 'K', 'P'};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const UNet& net,
                     const nlohmann::json& metadata) {
  nlohmann::json header;
  header["format"] = "radarseg-checkpoint";
  header["version"] = 1;
  header["model"] = net.config().to_json();
  header["metadata"] = metadata;
  nlohmann::json list = nlohmann::json::array();
  for (const Param* p : net.params()) list.push_back({{"name", p->name}, {"shape", p->value.dims()}});
  header["params"] = list;
  const std::string text = header.dump();

  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  const std::uint64_t len = text.size();
  char lenbuf[8];
  for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.write(lenbuf, 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Param* p : net.params()) write_rten(out, p->value);
  write_text_atomic(path, out.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[4];
  unsigned char lenbuf[8];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError(path.string() + " is not a radarseg checkpoint");
  }
  if (!in.read(reinterpret_cast<char*>(lenbuf), 8)) throw DataError("truncated checkpoint header");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= std::uint64_t{lenbuf[i]} << (8 * i);
  if (len > (std::uint64_t{1} << 30)) throw DataError("checkpoint header too large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw DataError("truncated checkpoint header");
  }
  Checkpoint ck;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
    ck.config = ModelConfig::from_json(header.at("model"));
    ck.metadata = header.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("bad checkpoint model config: ") + e.what());
  }
  ck.net = std::make_unique<UNet>(ck.config);
  const auto& params = ck.net->params();
  if (!header.contains("params") || header["params"].size() != params.size()) {
    throw DataError("checkpoint parameter list does not match the model");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (header["params"][i].value("name", "") != params[i]->name) {
      throw DataError("checkpoint parameter " + std::to_string(i) + " is not " + params[i]->name);
    }
    try {
      RealTensor t = std::get<RealTensor>(read_rten(in));
      if (t.dims() != params[i]->value.dims()) throw DataError("shape mismatch for " + params[i]->name);
      params[i]->value = std::move(t);
    } catch (const std::bad_variant_access&) {
      throw DataError("checkpoint parameter " + params[i]->name + " is not real");
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError("cannot read checkpoint parameter " + params[i]->name + ": " + e.what());
    }
  }
  return ck;
}

}  // namespace radarseg::nn
