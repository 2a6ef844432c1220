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

#include "radarseg/app/config.hpp"

#include <set>

#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"

namespace radarseg::app {

namespace {

using nlohmann::json;

// Reads typed fields from one section and rejects keys it never asked for.
class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) throw ConfigError("config section '" + name + "' must be an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    known_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    try {
      const json& v = node_->at(key);
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("config " + name_ + "." + key + " has the wrong type");
    }
  }

  void get_optional_double(const std::string& key, std::optional<double>& out) {
    known_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const json& v = node_->at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError("config " + name_ + "." + key + " must be a number or null");
    }
  }

  void get_doubles(const std::string& key, std::vector<double>& out) {
    known_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const json& v = node_->at(key);
    if (!v.is_array()) throw ConfigError("config " + name_ + "." + key + " must be an array");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("config " + name_ + "." + key + " must hold numbers");
      out.push_back(e.get<double>());
    }
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!known_.count(key)) throw ConfigError("unknown config key " + name_ + "." + key);
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> known_;
};

dsp::CfarKind cfar_kind_from_string(const std::string& s) {
  if (s == "ca") return dsp::CfarKind::kCellAveraging;
  if (s == "go") return dsp::CfarKind::kGreatestOf;
  if (s == "os") return dsp::CfarKind::kOrderedStatistic;
  throw ConfigError("eval.cfar_kind must be ca, go or os");
}

std::string to_string(dsp::CfarKind k) {
  switch (k) {
    case dsp::CfarKind::kCellAveraging: return "ca";
    case dsp::CfarKind::kGreatestOf: return "go";
    case dsp::CfarKind::kOrderedStatistic: return "os";
  }
  return "ca";
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kSections = {"radar", "scene", "labelgen", "model",
                                                  "loss",  "train", "eval"};
  for (const auto& [key, value] : j.items()) {
    if (!kSections.count(key)) throw ConfigError("unknown config section '" + key + "'");
  }
  RunConfig c;
  c.source = j;

  Section radar(j, "radar");
  auto& r = c.sim.radar;
  radar.get("num_channels", r.num_channels);
  radar.get("num_chirps", r.num_chirps);
  radar.get("num_samples", r.num_samples);
  radar.get("max_range", r.max_range);
  radar.get("max_doppler", r.max_doppler);
  radar.get("range_res", r.range_res);
  radar.get("doppler_res", r.doppler_res);
  radar.get("carrier_freq", r.carrier_freq);
  radar.get("virtual_spacing", r.virtual_spacing);
  radar.get("sample_interval", r.sample_interval);
  radar.get_optional_double("snr_db", c.sim.echo.snr_db);
  radar.get("mount_height", c.sim.echo.mount_height);
  radar.finish();

  Section scene(j, "scene");
  scene.get("frames", c.frames);
  scene.get("sequence_length", c.sim.sequence_length);
  scene.get("length", c.sim.scene.length);
  scene.get("width", c.sim.scene.width);
  scene.get("height", c.sim.scene.height);
  scene.get("scatterer_density", c.sim.scene.scatterer_density);
  scene.get("speed", c.sim.trajectory.speed);
  scene.get("frame_dt", c.sim.trajectory.frame_dt);
  scene.get("clearance", c.sim.trajectory.clearance);
  scene.get("turn_sigma", c.sim.trajectory.turn_sigma);
  scene.get("lookahead", c.sim.trajectory.lookahead);
  scene.get("lidar_rings", c.sim.lidar.num_rings);
  scene.get("lidar_beams", c.sim.lidar.num_beams);
  scene.get("lidar_noise", c.sim.lidar.noise_sigma);
  scene.get("lidar_height", c.sim.lidar.mount_height);
  scene.get("relief_depth", c.sim.lidar.relief_depth);
  scene.get("relief_protrusion", c.sim.lidar.relief_protrusion);
  scene.finish();

  Section lg(j, "labelgen");
  lg.get("z_min", c.labels.filter.z_min);
  lg.get("z_max", c.labels.filter.z_max);
  lg.get("intensity_min", c.labels.filter.intensity_min);
  lg.get("stride", c.labels.stride);
  lg.get("tau", c.labels.tau);
  lg.get("erosion_iterations", c.labels.erosion_iterations);
  lg.finish();

  Section model(j, "model");
  model.get("base_channels", c.model.base_channels);
  model.get("depth", c.model.depth);
  std::string attention = nn::to_string(c.model.attention);
  model.get("attention", attention);
  c.model.attention = nn::attention_from_string(attention);
  model.get("attention_kernel", c.model.attention_kernel);
  model.get("channel_reduction", c.model.channel_reduction);
  std::string mode = nn::to_string(c.input_mode);
  model.get("input_mode", mode);
  c.input_mode = nn::input_mode_from_string(mode);
  model.finish();

  Section loss(j, "loss");
  loss.get("bce_weight", c.loss.bce_weight);
  loss.get("dice_weight", c.loss.dice_weight);
  loss.get("dice_epsilon", c.loss.dice_epsilon);
  loss.finish();

  Section train(j, "train");
  train.get("epochs", c.train.epochs);
  train.get("batch_size", c.train.batch_size);
  train.get("lr", c.train.adam.lr);
  train.get("lr_decay", c.train.adam.lr_decay);
  train.get("beta1", c.train.adam.beta1);
  train.get("beta2", c.train.adam.beta2);
  train.get("adam_eps", c.train.adam.eps);
  train.get("val_modulus", c.val_modulus);
  train.finish();

  Section ev(j, "eval");
  ev.get_doubles("thresholds", c.eval.thresholds);
  ev.get("num_bins", c.eval.num_bins);
  ev.get("tau_pc", c.eval.tau_pc);
  ev.get("panels", c.eval.panels);
  std::string kind = to_string(c.eval.cfar.kind);
  ev.get("cfar_kind", kind);
  c.eval.cfar.kind = cfar_kind_from_string(kind);
  ev.get("cfar_guard_cells", c.eval.cfar.guard_cells);
  ev.get("cfar_train_cells", c.eval.cfar.train_cells);
  ev.get("cfar_threshold_scale", c.eval.cfar.threshold_scale);
  ev.finish();

  c.model.in_channels = 2 * c.sim.radar.num_channels;
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::validate() const {
  sim.validate();
  if (sim.radar.num_chirps != labels.grid.rows || sim.radar.num_samples != labels.grid.cols) {
    throw ConfigError("radar chirps x samples must match the 128 x 128 label grid");
  }
  if (frames == 0 || frames % 4 != 0) throw ConfigError("scene.frames must be a positive multiple of 4");
  try {
    labels.validate();
    eval.cfar.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  model.validate();
  if (model.in_channels != 2 * sim.radar.num_channels) {
    throw ConfigError("model input channels must be twice the radar channel count");
  }
  loss.validate();
  train.validate();
  if (val_modulus < 2) throw ConfigError("train.val_modulus must be >= 2");
  if (eval.thresholds.empty()) throw ConfigError("eval.thresholds must not be empty");
  for (double t : eval.thresholds) {
    if (!(t > 0 && t < 1)) throw ConfigError("eval.thresholds must lie in (0, 1)");
  }
  if (eval.num_bins == 0 || labels.grid.rows % eval.num_bins || labels.grid.cols % eval.num_bins) {
    throw ConfigError("eval.num_bins must divide 128");
  }
  if (eval.tau_pc == 0) throw ConfigError("eval.tau_pc must be >= 1");
}

json RunConfig::to_json() const {
  const auto& r = sim.radar;
  json j;
  j["radar"] = {{"num_channels", r.num_channels},   {"num_chirps", r.num_chirps},
                {"num_samples", r.num_samples},     {"max_range", r.max_range},
                {"max_doppler", r.max_doppler},     {"range_res", r.range_res},
                {"doppler_res", r.doppler_res},     {"carrier_freq", r.carrier_freq},
                {"virtual_spacing", r.virtual_spacing}, {"sample_interval", r.sample_interval},
                {"snr_db", sim.echo.snr_db ? json(*sim.echo.snr_db) : json(nullptr)},
                {"mount_height", sim.echo.mount_height}};
  j["scene"] = {{"frames", frames},
                {"sequence_length", sim.sequence_length},
                {"length", sim.scene.length},
                {"width", sim.scene.width},
                {"height", sim.scene.height},
                {"scatterer_density", sim.scene.scatterer_density},
                {"speed", sim.trajectory.speed},
                {"frame_dt", sim.trajectory.frame_dt},
                {"clearance", sim.trajectory.clearance},
                {"turn_sigma", sim.trajectory.turn_sigma},
                {"lookahead", sim.trajectory.lookahead},
                {"lidar_rings", sim.lidar.num_rings},
                {"lidar_beams", sim.lidar.num_beams},
                {"lidar_noise", sim.lidar.noise_sigma},
                {"lidar_height", sim.lidar.mount_height},
                {"relief_depth", sim.lidar.relief_depth},
                {"relief_protrusion", sim.lidar.relief_protrusion}};
  j["labelgen"] = {{"z_min", labels.filter.z_min},
                   {"z_max", labels.filter.z_max},
                   {"intensity_min", labels.filter.intensity_min},
                   {"stride", labels.stride},
                   {"tau", labels.tau},
                   {"erosion_iterations", labels.erosion_iterations}};
  j["model"] = {{"base_channels", model.base_channels},
                {"depth", model.depth},
                {"attention", nn::to_string(model.attention)},
                {"attention_kernel", model.attention_kernel},
                {"channel_reduction", model.channel_reduction},
                {"input_mode", nn::to_string(input_mode)}};
  j["loss"] = {{"bce_weight", loss.bce_weight},
               {"dice_weight", loss.dice_weight},
               {"dice_epsilon", loss.dice_epsilon}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"lr", train.adam.lr},
                {"lr_decay", train.adam.lr_decay},
                {"beta1", train.adam.beta1},
                {"beta2", train.adam.beta2},
                {"adam_eps", train.adam.eps},
                {"val_modulus", val_modulus}};
  j["eval"] = {{"thresholds", eval.thresholds},
               {"num_bins", eval.num_bins},
               {"tau_pc", eval.tau_pc},
               {"panels", eval.panels},
               {"cfar_kind", to_string(eval.cfar.kind)},
               {"cfar_guard_cells", eval.cfar.guard_cells},
               {"cfar_train_cells", eval.cfar.train_cells},
               {"cfar_threshold_scale", eval.cfar.threshold_scale}};
  return j;
}

}  // namespace radarseg::app
