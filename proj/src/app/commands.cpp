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

#include "radarseg/app/commands.hpp"

#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "radarseg/app/pipeline.hpp"
#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"
#include "radarseg/parallel.hpp"

namespace radarseg::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void say(const Options& opt, const std::string& line) {
  if (opt.log) *opt.log << line << std::endl;
}

std::vector<FovLabel> labels_for(const Options& opt, const fs::path& dataset,
                                 const sim::DatasetManifest& m,
                                 const std::optional<fs::path>& labels_dir) {
  if (labels_dir) return read_labels(*labels_dir, m);
  say(opt, "generating LiDAR labels");
  return dataset_labels(dataset, m, opt.config.labels, opt.jobs);
}

nn::SampleSet subset(const nn::SampleSet& all, Split split, std::size_t modulus) {
  if (split == Split::kAll) return all;
  nn::SampleSet tr, va;
  nn::split_train_val(all, tr, va, modulus);
  return split == Split::kTrain ? tr : va;
}

std::vector<FovLabel> binarized(const std::vector<eval::ProbabilityMap>& preds, double t) {
  std::vector<FovLabel> out;
  for (const auto& p : preds) out.push_back(eval::binarize(p, t));
  return out;
}

std::vector<FovLabel> label_list(const nn::SampleSet& set) {
  std::vector<FovLabel> out;
  for (const auto& s : set.samples) out.push_back(s.label);
  return out;
}

std::vector<eval::ConfusionCounts> counts(std::span<const FovLabel> masks,
                                          std::span<const FovLabel> labels) {
  std::vector<eval::ConfusionCounts> out;
  for (std::size_t i = 0; i < masks.size(); ++i) out.push_back(eval::confusion(masks[i], labels[i]));
  return out;
}

std::string metric_fields(const eval::MetricReport& r) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.accuracy, r.precision,
                r.recall, r.f1, r.iou, r.far);
  return buf;
}

constexpr const char* kMetricColumns = "accuracy,precision,recall,f1,iou,far";

struct ArmResult {
  std::size_t parameters = 0;
  double seconds = 0;
  eval::MetricReport at_half;
};

// Trains one configuration on the training split and sweeps thresholds on
// the held-out split.
ArmResult run_arm(const Options& opt, const RunConfig& cfg, const nn::SampleSet& all,
                  const fs::path& dir, const std::string& tag) {
  fs::create_directories(dir);
  nn::SampleSet tr, va;
  nn::split_train_val(all, tr, va, cfg.val_modulus);
  if (va.samples.empty()) throw DataError("no held-out frames (ids % val_modulus)");
  nn::ModelConfig mc = cfg.model;
  mc.in_channels = all.input_shape.at(0);
  nn::UNet net(mc);
  nn::TrainConfig tc = cfg.train;
  tc.seed = opt.seed;
  const auto res = nn::train(net, tr, va, tc, cfg.loss, dir, cfg.to_json(),
                             [&](const nn::EpochRecord& e) {
                               char line[160];
                               std::snprintf(line, sizeof line,
                                             "[%s] epoch %zu train %.5f val %.5f iou %.4f",
                                             tag.c_str(), e.epoch, e.train_loss, e.val_loss,
                                             e.val_iou);
                               say(opt, line);
                             });
  const auto preds = nn::predict(net, va, tc.batch_size);
  const auto labels = label_list(va);
  const auto sweep = eval::threshold_sweep(preds, labels, cfg.eval.thresholds);
  eval::write_sweep_csv(dir / "sweep.csv", sweep);
  ArmResult arm;
  arm.parameters = net.parameter_count();
  arm.seconds = res.seconds;
  arm.at_half = eval::metric_suite(counts(binarized(preds, 0.5), labels), 0.5);
  return arm;
}

nn::SampleSet load_all(const Options& opt, const fs::path& dataset, nn::InputMode mode,
                       const std::optional<fs::path>& labels_dir) {
  const auto m = sim::read_manifest(dataset);
  const auto labels = labels_for(opt, dataset, m, labels_dir);
  say(opt, "loading " + std::to_string(m.frames.size()) + " frames as " + nn::to_string(mode));
  return nn::load_samples(dataset, m, labels, mode, opt.jobs);
}

}  // namespace

void prepare_out_dir(const fs::path& out, bool force) {
  if (out.empty()) throw ConfigError("--out is required");
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw ConfigError(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out) && !force) {
      throw ConfigError(out.string() + " is not empty; pass --force to overwrite");
    }
  }
  fs::create_directories(out);
}

void write_run_config(const Options& opt, const std::string& command) {
  const json j = {{"command", command},
                  {"seed", opt.seed},
                  {"config", opt.config.to_json()},
                  {"config_source", opt.config.source}};
  write_text_atomic(opt.out / "run_config.json", j.dump(2) + "\n");
}

void cmd_simulate(const Options& opt) {
  prepare_out_dir(opt.out, opt.force);
  say(opt, "simulating " + std::to_string(opt.config.frames) + " frames");
  sim::simulate_dataset(opt.config.sim, opt.out, opt.config.frames, opt.seed, opt.jobs,
                        opt.config.to_json());
  write_run_config(opt, "simulate");
}

void cmd_dsp(const Options& opt, const fs::path& dataset, nn::InputMode mode) {
  const auto m = sim::read_manifest(dataset);
  prepare_out_dir(opt.out, opt.force);
  json frames = json::array();
  std::vector<std::string> names(m.frames.size());
  parallel_for(m.frames.size(), opt.jobs, [&](std::size_t i) {
    const auto& f = m.frames[i];
    names[i] = frame_file(nn::to_string(mode) + "_", f.id, ".rten");
    write_rten(opt.out / names[i], nn::model_input(sim::load_adc(dataset, m, f), mode));
  });
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    frames.push_back({{"id", m.frames[i].id}, {"file", names[i]}});
  }
  const json manifest = {{"mode", nn::to_string(mode)},
                         {"shape", {2 * m.radar.num_channels, m.radar.num_chirps, m.radar.num_samples}},
                         {"channels", "real parts, then imaginary parts"},
                         {"frames", frames}};
  write_text_atomic(opt.out / "dsp_manifest.json", manifest.dump(2) + "\n");
  write_run_config(opt, "dsp");
}

void cmd_labels(const Options& opt, const fs::path& dataset) {
  const auto m = sim::read_manifest(dataset);
  prepare_out_dir(opt.out, opt.force);
  const auto labels = dataset_labels(dataset, m, opt.config.labels, opt.jobs);
  std::vector<std::size_t> ids;
  for (const auto& f : m.frames) ids.push_back(f.id);
  labels::write_labels(opt.out, ids, labels);

  // QC against the simulator's geometric free space.
  const auto truth = geometric_labels(dataset, m);
  std::ostringstream csv;
  csv << "id,scene_class,free_fraction,monotone_ok,iou_vs_geometry\n";
  std::vector<eval::ConfusionCounts> cc;
  std::size_t monotone = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto qc = labels::label_qc(labels[i]);
    cc.push_back(eval::confusion(labels[i], truth[i]));
    monotone += qc.monotone_ok;
    char line[160];
    std::snprintf(line, sizeof line, "%zu,%s,%.6f,%d,%.6f\n", ids[i],
                  sim::to_string(m.frames[i].scene_class).c_str(), qc.free_fraction,
                  qc.monotone_ok ? 1 : 0, eval::sample_iou(cc.back()));
    csv << line;
  }
  write_text_atomic(opt.out / "qc.csv", csv.str());
  double min_iou = 1.0;
  for (const auto& c : cc) min_iou = std::min(min_iou, eval::sample_iou(c));
  const json report = {{"frames", labels.size()},
                       {"monotone_ok", monotone},
                       {"mean_iou_vs_geometry", cc.empty() ? 0.0 : eval::metric_suite(cc).iou},
                       {"min_iou_vs_geometry", cc.empty() ? 0.0 : min_iou}};
  write_text_atomic(opt.out / "qc_report.json", report.dump(2) + "\n");
  write_run_config(opt, "labels");
  say(opt, "labels written; " + report.dump());
}

void cmd_train(const Options& opt, const fs::path& dataset,
               const std::optional<fs::path>& labels_dir) {
  prepare_out_dir(opt.out, opt.force);
  const auto all = load_all(opt, dataset, opt.config.input_mode, labels_dir);
  write_run_config(opt, "train");
  const ArmResult arm = run_arm(opt, opt.config, all, opt.out, "train");
  say(opt, "held-out IoU@0.5 " + std::to_string(arm.at_half.iou));
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "all") return Split::kAll;
  throw ConfigError("--split must be train, val or all");
}

void cmd_eval(const Options& opt, const fs::path& dataset, const fs::path& checkpoint,
              const std::optional<fs::path>& labels_dir, Split split) {
  if (!fs::exists(checkpoint)) throw DataError("checkpoint not found: " + checkpoint.string());
  nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
  const auto m = sim::read_manifest(dataset);
  RunConfig cfg = opt.config;
  const auto all = load_all(opt, dataset, cfg.input_mode, labels_dir);
  if (all.input_shape.at(0) != ck.config.in_channels) {
    throw DataError("checkpoint expects " + std::to_string(ck.config.in_channels) +
                    " input channels, dataset gives " + std::to_string(all.input_shape.at(0)));
  }
  const nn::SampleSet set = subset(all, split, cfg.val_modulus);
  if (set.samples.empty()) throw DataError("evaluation split is empty");
  prepare_out_dir(opt.out, opt.force);
  write_run_config(opt, "eval");

  const auto preds = nn::predict(*ck.net, set, cfg.train.batch_size);
  const auto labels = label_list(set);
  eval::write_sweep_csv(opt.out / "sweep.csv",
                        eval::threshold_sweep(preds, labels, cfg.eval.thresholds));
  const auto masks = binarized(preds, 0.5);
  eval::write_bins_csv(opt.out / "range_bins.csv",
                       eval::binned_iou(masks, labels, eval::BinAxis::kRange, cfg.eval.num_bins));
  eval::write_bins_csv(opt.out / "azimuth_bins.csv",
                       eval::binned_iou(masks, labels, eval::BinAxis::kAzimuth, cfg.eval.num_bins));
  const auto seg_counts = counts(masks, labels);
  std::vector<sim::SceneClass> classes;
  for (const auto& s : set.samples) classes.push_back(s.scene_class);
  eval::write_scene_csv(opt.out / "scene_report.csv", eval::per_scene_report(classes, seg_counts));

  // Conventional baselines on the same label grid.
  std::map<std::size_t, const sim::FrameEntry*> by_id;
  for (const auto& f : m.frames) by_id[f.id] = &f;
  std::vector<FovLabel> pc_masks(set.samples.size());
  parallel_for(set.samples.size(), opt.jobs, [&](std::size_t i) {
    const auto cube = sim::load_adc(dataset, m, *by_id.at(set.samples[i].id));
    pc_masks[i] = eval::pointcloud_fov_baseline(dsp::conventional_pointcloud(cube, cfg.eval.cfar),
                                                cfg.eval.tau_pc, cfg.labels.grid);
  });
  const std::vector<FovLabel> all_free(set.samples.size(), FovLabel(128, 128, 1));
  std::ostringstream cmp;
  cmp << "method,n," << kMetricColumns << '\n';
  cmp << "segmentation," << set.samples.size() << ','
      << metric_fields(eval::metric_suite(seg_counts)) << '\n';
  cmp << "pointcloud_cfar," << set.samples.size() << ','
      << metric_fields(eval::metric_suite(counts(pc_masks, labels))) << '\n';
  cmp << "all_free," << set.samples.size() << ','
      << metric_fields(eval::metric_suite(counts(all_free, labels))) << '\n';
  write_text_atomic(opt.out / "comparison.csv", cmp.str());

  fs::create_directories(opt.out / "panels");
  for (std::size_t i = 0; i < std::min(cfg.eval.panels, set.samples.size()); ++i) {
    eval::write_triptych(opt.out / "panels" / frame_file("panel_", set.samples[i].id, ".pgm"),
                         labels[i], masks[i]);
  }
  say(opt, "evaluation written to " + opt.out.string());
}

void cmd_ablate(const Options& opt, const fs::path& dataset,
                const std::optional<fs::path>& labels_dir) {
  prepare_out_dir(opt.out, opt.force);
  const auto all = load_all(opt, dataset, opt.config.input_mode, labels_dir);
  write_run_config(opt, "ablate");
  std::ostringstream csv;
  csv << "attention,parameters,train_seconds," << kMetricColumns << '\n';
  for (nn::Attention a : {nn::Attention::kSpatial, nn::Attention::kChannel}) {
    RunConfig cfg = opt.config;
    cfg.model.attention = a;
    const ArmResult arm = run_arm(opt, cfg, all, opt.out / nn::to_string(a), nn::to_string(a));
    char head[96];
    std::snprintf(head, sizeof head, "%s,%zu,%.1f,", nn::to_string(a).c_str(), arm.parameters,
                  arm.seconds);
    csv << head << metric_fields(arm.at_half) << '\n';
  }
  write_text_atomic(opt.out / "ablation.csv", csv.str());
}

void cmd_compare_inputs(const Options& opt, const fs::path& dataset,
                        const std::optional<fs::path>& labels_dir) {
  const auto m = sim::read_manifest(dataset);
  prepare_out_dir(opt.out, opt.force);
  const auto labels = labels_for(opt, dataset, m, labels_dir);
  write_run_config(opt, "compare-inputs");
  std::ostringstream csv;
  csv << "input_mode,parameters,train_seconds," << kMetricColumns << '\n';
  std::map<nn::InputMode, double> iou;
  for (nn::InputMode mode : {nn::InputMode::kAdc, nn::InputMode::kRa, nn::InputMode::kRd}) {
    say(opt, "loading frames as " + nn::to_string(mode));
    const auto all = nn::load_samples(dataset, m, labels, mode, opt.jobs);
    RunConfig cfg = opt.config;
    cfg.input_mode = mode;
    const ArmResult arm = run_arm(opt, cfg, all, opt.out / nn::to_string(mode), nn::to_string(mode));
    iou[mode] = arm.at_half.iou;
    char head[96];
    std::snprintf(head, sizeof head, "%s,%zu,%.1f,", nn::to_string(mode).c_str(), arm.parameters,
                  arm.seconds);
    csv << head << metric_fields(arm.at_half) << '\n';
  }
  write_text_atomic(opt.out / "input_modes.csv", csv.str());
  const bool ordering = iou[nn::InputMode::kRd] >= iou[nn::InputMode::kRa] &&
                        iou[nn::InputMode::kRa] > iou[nn::InputMode::kAdc];
  const json summary = {{"iou_adc", iou[nn::InputMode::kAdc]},
                        {"iou_ra", iou[nn::InputMode::kRa]},
                        {"iou_rd", iou[nn::InputMode::kRd]},
                        {"rd_ge_ra_gt_adc", ordering},
                        {"note", "ordering is reported, not required"}};
  write_text_atomic(opt.out / "input_modes_summary.json", summary.dump(2) + "\n");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  return 1;
}

}  // namespace radarseg::app
