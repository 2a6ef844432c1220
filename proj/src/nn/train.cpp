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

#include "radarseg/nn/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"
#include "radarseg/parallel.hpp"
#include "radarseg/random.hpp"

namespace radarseg::nn {

std::string to_string(InputMode m) {
  switch (m) {
    case InputMode::kAdc: return "adc";
    case InputMode::kRa: return "ra";
    case InputMode::kRd: return "rd";
  }
  return "rd";
}

InputMode input_mode_from_string(const std::string& name) {
  if (name == "adc") return InputMode::kAdc;
  if (name == "ra") return InputMode::kRa;
  if (name == "rd") return InputMode::kRd;
  throw ConfigError("unknown input mode '" + name + "' (expected adc, ra or rd)");
}

RealTensor model_input(const dsp::AdcCube& cube, InputMode mode) {
  ComplexTensor t;
  switch (mode) {
    case InputMode::kAdc: t = cube.data; break;
    case InputMode::kRd: t = dsp::adc_to_rd(cube).data; break;
    case InputMode::kRa: t = dsp::rd_to_ra(dsp::adc_to_rd(cube)).data; break;
  }
  const std::size_t C = t.extent(0), plane = t.extent(1) * t.extent(2);
  RealTensor out({2 * C, t.extent(1), t.extent(2)});
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      out[c * plane + i] = t[c * plane + i].real();
      out[(C + c) * plane + i] = t[c * plane + i].imag();
    }
  }
  return out;
}

SampleSet load_samples(const std::filesystem::path& dataset_dir,
                       const sim::DatasetManifest& manifest, std::span<const FovLabel> labels,
                       InputMode mode, std::size_t jobs) {
  if (labels.size() != manifest.frames.size()) {
    throw DataError("label count " + std::to_string(labels.size()) + " does not match " +
                    std::to_string(manifest.frames.size()) + " frames");
  }
  SampleSet set;
  set.samples.resize(manifest.frames.size());
  std::vector<Shape> shapes(manifest.frames.size());
  parallel_for(manifest.frames.size(), jobs, [&](std::size_t i) {
    const auto& f = manifest.frames[i];
    const RealTensor x = model_input(sim::load_adc(dataset_dir, manifest, f), mode);
    double ss = 0;
    for (double v : x.values()) ss += v * v;
    const double rms = std::sqrt(ss / static_cast<double>(x.size()));
    const double scale = rms > 0 ? 1.0 / rms : 1.0;
    Sample& s = set.samples[i];
    s.id = f.id;
    s.scene_class = f.scene_class;
    s.input.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) s.input[k] = static_cast<float>(x[k] * scale);
    s.label = labels[i];
    shapes[i] = x.dims();
  });
  if (!shapes.empty()) set.input_shape = shapes.front();
  return set;
}

void split_train_val(const SampleSet& all, SampleSet& train, SampleSet& val, std::size_t modulus) {
  if (modulus < 2) throw ConfigError("validation modulus must be >= 2");
  train = SampleSet{all.input_shape, {}};
  val = SampleSet{all.input_shape, {}};
  for (const Sample& s : all.samples) {
    (s.id % modulus == modulus - 1 ? val : train).samples.push_back(s);
  }
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  adam.validate();
}

Tensor make_batch(const SampleSet& set, std::span<const std::size_t> order, std::size_t first,
                  std::size_t count, Tensor* labels) {
  if (set.input_shape.size() != 3) throw std::invalid_argument("sample set has no input shape");
  const std::size_t C = set.input_shape[0], H = set.input_shape[1], W = set.input_shape[2];
  const std::size_t per = C * H * W;
  Tensor x({count, C, H, W});
  if (labels) *labels = Tensor({count, H, W});
  for (std::size_t b = 0; b < count; ++b) {
    const Sample& s = set.samples[order[first + b]];
    if (s.input.size() != per) throw DataError("sample " + std::to_string(s.id) + " has the wrong size");
    std::copy(s.input.begin(), s.input.end(), x.values().begin() + static_cast<long>(b * per));
    if (labels) {
      if (s.label.rows() != H || s.label.cols() != W) {
        throw DataError("label of sample " + std::to_string(s.id) + " does not match the input grid");
      }
      for (std::size_t i = 0; i < H * W; ++i) (*labels)[b * H * W + i] = s.label.cells()[i];
    }
  }
  return x;
}

namespace {

struct Pass {
  double loss = 0;
  std::vector<eval::ConfusionCounts> counts;
};

// Forward over a whole set; optionally backward + Adam per batch.
Pass run_pass(UNet& net, const SampleSet& set, std::span<const std::size_t> order,
              std::size_t batch_size, const LossConfig& loss_cfg, Adam* opt, double lr,
              std::size_t epoch, bool collect_counts) {
  Pass pass;
  const std::size_t n = order.size();
  for (std::size_t first = 0, batch = 0; first < n; first += batch_size, ++batch) {
    const std::size_t count = std::min(batch_size, n - first);
    Tensor labels;
    const Tensor x = make_batch(set, order, first, count, &labels);
    const Tensor p = net.forward(x);
    LossValue lv = seg_loss(p, labels, loss_cfg);
    auto where = [&] {
      std::ostringstream msg;
      msg << "epoch " << epoch << ", batch " << batch << " (sample ids";
      for (std::size_t b = 0; b < count; ++b) msg << ' ' << set.samples[order[first + b]].id;
      msg << ')';
      return msg.str();
    };
    if (!std::isfinite(lv.total)) throw NumericalError("non-finite loss at " + where());
    pass.loss += lv.total * static_cast<double>(count);
    if (opt) {
      net.zero_grad();
      net.backward(lv.grad);
      try {
        opt->step(lr);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at " + where());
      }
    }
    if (collect_counts) {
      const std::size_t H = p.extent(1), W = p.extent(2);
      for (std::size_t b = 0; b < count; ++b) {
        eval::ProbabilityMap m{H, W, {p.values().begin() + long(b * H * W),
                                      p.values().begin() + long((b + 1) * H * W)}};
        pass.counts.push_back(
            eval::confusion(eval::binarize(m, 0.5), set.samples[order[first + b]].label));
      }
    }
  }
  pass.loss /= static_cast<double>(std::max<std::size_t>(n, 1));
  return pass;
}

}  // namespace

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> rows) {
  std::ostringstream out;
  out << kHistoryCsvHeader << '\n';
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g\n", r.epoch, r.train_loss, r.val_loss,
                  r.val_iou);
    out << line;
  }
  write_text_atomic(path, out.str());
}

TrainResult train(UNet& net, const SampleSet& train_set, const SampleSet& val_set,
                  const TrainConfig& cfg, const LossConfig& loss_cfg,
                  const std::filesystem::path& out_dir, const nlohmann::json& config_echo,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  loss_cfg.validate();
  if (train_set.samples.empty()) throw DataError("training set is empty");
  const auto start = std::chrono::steady_clock::now();
  net.init(mix_seed(cfg.seed, 0));
  Adam opt(net.params(), cfg.adam);
  TrainResult result;
  std::vector<std::size_t> order(train_set.samples.size());
  std::vector<std::size_t> val_order(val_set.samples.size());
  std::iota(val_order.begin(), val_order.end(), 0);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(cfg.seed, epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = cfg.adam.lr_at_epoch(epoch - 1);
    rec.train_loss =
        run_pass(net, train_set, order, cfg.batch_size, loss_cfg, &opt, rec.lr, epoch, false).loss;
    if (!val_set.samples.empty()) {
      const Pass v = run_pass(net, val_set, val_order, cfg.batch_size, loss_cfg, nullptr, 0.0,
                              epoch, true);
      rec.val_loss = v.loss;
      rec.val_iou = eval::metric_suite(v.counts).iou;
    }
    result.history.push_back(rec);
    if (!out_dir.empty()) {
      write_history_csv(out_dir / "history.csv", result.history);
      save_checkpoint(out_dir / "checkpoint.rckp", net,
                      {{"epoch", epoch},
                       {"train_loss", rec.train_loss},
                       {"val_loss", rec.val_loss},
                       {"val_iou", rec.val_iou},
                       {"config", config_echo}});
    }
    if (on_epoch) on_epoch(rec);
  }
  result.optimizer_steps = opt.steps();
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<eval::ProbabilityMap> predict(UNet& net, const SampleSet& set,
                                          std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  std::vector<std::size_t> order(set.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<eval::ProbabilityMap> out;
  for (std::size_t first = 0; first < order.size(); first += batch_size) {
    const std::size_t count = std::min(batch_size, order.size() - first);
    const Tensor p = net.forward(make_batch(set, order, first, count));
    const std::size_t H = p.extent(1), W = p.extent(2);
    for (std::size_t b = 0; b < count; ++b) {
      out.push_back({H, W, {p.values().begin() + long(b * H * W),
                            p.values().begin() + long((b + 1) * H * W)}});
    }
  }
  return out;
}

}  // namespace radarseg::nn
