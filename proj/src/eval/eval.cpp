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

#include "radarseg/eval.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "radarseg/io.hpp"
#include "radarseg/labelgen.hpp"

namespace radarseg::eval {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

FovLabel binarize(const ProbabilityMap& pred, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("threshold must lie in (0, 1)");
  }
  if (pred.values.size() != pred.rows * pred.cols) {
    throw std::invalid_argument("probability map size mismatch");
  }
  FovLabel mask(pred.rows, pred.cols);
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    mask.set(i / pred.cols, i % pred.cols, pred.values[i] >= threshold);
  }
  return mask;
}

ConfusionCounts confusion(const FovLabel& mask, const FovLabel& label, std::size_t r0,
                          std::size_t r1, std::size_t c0, std::size_t c1) {
  if (mask.rows() != label.rows() || mask.cols() != label.cols()) {
    throw std::invalid_argument("mask and label shapes differ");
  }
  if (r1 > mask.rows() || c1 > mask.cols() || r0 > r1 || c0 > c1) {
    throw std::invalid_argument("confusion region out of range");
  }
  ConfusionCounts c;
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t k = c0; k < c1; ++k) {
      const bool p = mask(r, k) != 0, y = label(r, k) != 0;
      if (p && y) ++c.tp;
      else if (p) ++c.fp;
      else if (y) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

ConfusionCounts confusion(const FovLabel& mask, const FovLabel& label) {
  return confusion(mask, label, 0, mask.rows(), 0, mask.cols());
}

namespace {

double ratio_or_empty(std::uint64_t num, std::uint64_t den, const ConfusionCounts& c) {
  if (den > 0) return static_cast<double>(num) / static_cast<double>(den);
  return c.tp + c.fp + c.fn == 0 ? 1.0 : 0.0;
}

}  // namespace

double sample_precision(const ConfusionCounts& c) { return ratio_or_empty(c.tp, c.tp + c.fp, c); }
double sample_recall(const ConfusionCounts& c) { return ratio_or_empty(c.tp, c.tp + c.fn, c); }
double sample_iou(const ConfusionCounts& c) { return ratio_or_empty(c.tp, c.tp + c.fp + c.fn, c); }
double sample_f1(const ConfusionCounts& c) {
  return ratio_or_empty(2 * c.tp, 2 * c.tp + c.fp + c.fn, c);
}
double sample_accuracy(const ConfusionCounts& c) {
  return c.total() ? static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()) : 1.0;
}
double sample_far(const ConfusionCounts& c) {
  return c.fp + c.tn ? static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn) : 0.0;
}

MetricReport metric_suite(std::span<const ConfusionCounts> samples, double threshold) {
  if (samples.empty()) throw std::invalid_argument("metric_suite needs at least one sample");
  MetricReport r;
  for (const auto& c : samples) {
    r.accuracy += sample_accuracy(c);
    r.precision += sample_precision(c);
    r.recall += sample_recall(c);
    r.iou += sample_iou(c);
    r.f1 += sample_f1(c);
    r.far += sample_far(c);
  }
  const double n = static_cast<double>(samples.size());
  r.accuracy /= n;
  r.precision /= n;
  r.recall /= n;
  r.iou /= n;
  r.f1 /= n;
  r.far /= n;
  r.n = samples.size();
  r.threshold = threshold;
  return r;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int k = 1; k <= 19; ++k) t.push_back(k / 20.0);
  return t;
}

std::vector<MetricReport> threshold_sweep(std::span<const ProbabilityMap> preds,
                                          std::span<const FovLabel> labels,
                                          std::span<const double> thresholds) {
  if (preds.size() != labels.size()) throw std::invalid_argument("prediction and label counts differ");
  std::vector<MetricReport> rows;
  std::vector<ConfusionCounts> counts(preds.size());
  for (double t : thresholds) {
    for (std::size_t i = 0; i < preds.size(); ++i) counts[i] = confusion(binarize(preds[i], t), labels[i]);
    rows.push_back(metric_suite(counts, t));
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const MetricReport> rows) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.2f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.threshold,
                  r.accuracy, r.precision, r.recall, r.f1, r.iou, r.far);
    out << line;
  }
  write_text_atomic(path, out.str());
}

std::vector<BinRow> binned_iou(std::span<const FovLabel> masks, std::span<const FovLabel> labels,
                               BinAxis axis, std::size_t num_bins, const GridGeometry& grid) {
  if (masks.size() != labels.size()) throw std::invalid_argument("mask and label counts differ");
  const std::size_t extent = axis == BinAxis::kRange ? grid.rows : grid.cols;
  if (num_bins == 0 || extent % num_bins != 0) {
    throw std::invalid_argument("num_bins must divide the grid extent");
  }
  const std::size_t width = extent / num_bins;
  std::vector<BinRow> rows(num_bins);
  for (std::size_t b = 0; b < num_bins; ++b) {
    BinRow& row = rows[b];
    row.bin_index = b;
    if (axis == BinAxis::kRange) {
      row.bin_start = grid.row_start(b * width);
      row.bin_end = grid.row_start((b + 1) * width);
    } else {
      row.bin_start = -grid.fov_deg / 2 + static_cast<double>(b * width) * grid.azimuth_cell();
      row.bin_end = -grid.fov_deg / 2 + static_cast<double>((b + 1) * width) * grid.azimuth_cell();
    }
    double sum = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      const ConfusionCounts c =
          axis == BinAxis::kRange
              ? confusion(masks[i], labels[i], b * width, (b + 1) * width, 0, grid.cols)
              : confusion(masks[i], labels[i], 0, grid.rows, b * width, (b + 1) * width);
      row.pooled += c;
      sum += sample_iou(c);
    }
    row.n = masks.size();
    row.iou = masks.empty() ? 0.0 : sum / static_cast<double>(masks.size());
  }
  return rows;
}

void write_bins_csv(const std::filesystem::path& path, std::span<const BinRow> rows) {
  std::ostringstream out;
  out << kBinCsvHeader << '\n';
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%zu,%.6g,%.6g,%.6f,%zu\n", r.bin_index, r.bin_start,
                  r.bin_end, r.iou, r.n);
    out << line;
  }
  write_text_atomic(path, out.str());
}

SceneReport per_scene_report(std::span<const sim::SceneClass> classes,
                             std::span<const ConfusionCounts> samples, double threshold) {
  if (classes.size() != samples.size()) throw std::invalid_argument("class and sample counts differ");
  SceneReport report;
  for (sim::SceneClass cls : sim::kAllSceneClasses) {
    std::vector<ConfusionCounts> group;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (classes[i] == cls) group.push_back(samples[i]);
    }
    if (group.empty()) {
      report.notes.push_back("scene class '" + sim::to_string(cls) + "' has no samples; omitted");
      continue;
    }
    report.rows.emplace_back(cls, metric_suite(group, threshold));
  }
  return report;
}

void write_scene_csv(const std::filesystem::path& path, const SceneReport& report) {
  std::ostringstream out;
  out << "scene_class,n,accuracy,precision,recall,f1,iou,far\n";
  char line[256];
  for (const auto& [cls, r] : report.rows) {
    std::snprintf(line, sizeof line, "%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  sim::to_string(cls).c_str(), r.n, r.accuracy, r.precision, r.recall, r.f1,
                  r.iou, r.far);
    out << line;
  }
  for (const auto& note : report.notes) out << "# " << note << '\n';
  write_text_atomic(path, out.str());
}

FovLabel pointcloud_fov_baseline(const dsp::RadarPointCloud& cloud, std::size_t tau_pc,
                                 const GridGeometry& grid) {
  std::vector<labels::PolarPoint> pts;
  for (const auto& p : cloud) {
    if (grid.in_view(p.range_m, p.azimuth_deg)) pts.push_back({p.range_m, p.azimuth_deg});
  }
  return labels::fov_label(labels::rasterize_occupancy(pts, tau_pc, grid));
}

void write_triptych(const std::filesystem::path& path, const FovLabel& label,
                    const FovLabel& prediction) {
  if (label.rows() != prediction.rows() || label.cols() != prediction.cols()) {
    throw std::invalid_argument("triptych panels differ in shape");
  }
  const std::size_t R = label.rows(), C = label.cols(), gap = 2, W = 3 * C + 2 * gap;
  std::vector<std::uint8_t> gray(R * W, 128);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      const bool y = label(r, c) != 0, p = prediction(r, c) != 0;
      gray[r * W + c] = y ? 255 : 0;
      gray[r * W + C + gap + c] = p ? 255 : 0;
      gray[r * W + 2 * (C + gap) + c] = y ? (p ? 255 : 170) : (p ? 85 : 0);
    }
  }
  write_pgm(path, gray, R, W);
}

}  // namespace radarseg::eval
