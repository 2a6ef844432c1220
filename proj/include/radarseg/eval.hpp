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

#ifndef RADARSEG_EVAL_HPP_
#define RADARSEG_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "radarseg/geometry.hpp"
#include "radarseg/radar_dsp.hpp"
#include "radarseg/simworld.hpp"

namespace radarseg::eval {

// A probability map on the label grid, row-major.
struct ProbabilityMap {
  std::size_t rows = 128;
  std::size_t cols = 128;
  std::vector<double> values;
};

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

struct MetricReport {
  double accuracy = 0, precision = 0, recall = 0, iou = 0, f1 = 0, far = 0;
  std::size_t n = 0;
  double threshold = 0.5;
};

// Cells at or above the threshold become 1. Throws unless 0 < threshold < 1.
FovLabel binarize(const ProbabilityMap& pred, double threshold);

// Throws std::invalid_argument when the grids differ in shape.
ConfusionCounts confusion(const FovLabel& mask, const FovLabel& label);
// Restricted to rows [r0, r1) and columns [c0, c1).
ConfusionCounts confusion(const FovLabel& mask, const FovLabel& label, std::size_t r0,
                          std::size_t r1, std::size_t c0, std::size_t c1);

// Per-sample ratios. A zero denominator scores 1 when the sample has no
// positives in label or prediction and 0 otherwise; FAR scores 0 when
// FP + TN = 0.
double sample_precision(const ConfusionCounts& c);
double sample_recall(const ConfusionCounts& c);
double sample_iou(const ConfusionCounts& c);
double sample_f1(const ConfusionCounts& c);
double sample_accuracy(const ConfusionCounts& c);
double sample_far(const ConfusionCounts& c);

// Mean of per-sample ratios. Throws std::invalid_argument for no samples.
MetricReport metric_suite(std::span<const ConfusionCounts> samples, double threshold = 0.5);

// 0.05, 0.10, ..., 0.95.
std::vector<double> default_thresholds();

std::vector<MetricReport> threshold_sweep(std::span<const ProbabilityMap> preds,
                                          std::span<const FovLabel> labels,
                                          std::span<const double> thresholds);

inline constexpr const char* kSweepCsvHeader = "threshold,accuracy,precision,recall,f1,iou,far";
void write_sweep_csv(const std::filesystem::path& path, std::span<const MetricReport> rows);

enum class BinAxis { kRange, kAzimuth };

struct BinRow {
  std::size_t bin_index = 0;
  double bin_start = 0;  // metres for range, degrees for azimuth
  double bin_end = 0;
  double iou = 0;        // mean per-sample IoU inside the band
  std::size_t n = 0;
  ConfusionCounts pooled;  // summed over samples
};

// Splits rows (range) or columns (azimuth) into equal bands. Throws unless
// num_bins divides the grid extent along the axis.
std::vector<BinRow> binned_iou(std::span<const FovLabel> masks, std::span<const FovLabel> labels,
                               BinAxis axis, std::size_t num_bins = 8,
                               const GridGeometry& grid = {});

inline constexpr const char* kBinCsvHeader = "bin_index,bin_start,bin_end,iou,n";
void write_bins_csv(const std::filesystem::path& path, std::span<const BinRow> rows);

struct SceneReport {
  std::vector<std::pair<sim::SceneClass, MetricReport>> rows;
  std::vector<std::string> notes;  // e.g. classes without samples
};

SceneReport per_scene_report(std::span<const sim::SceneClass> classes,
                             std::span<const ConfusionCounts> samples, double threshold = 0.5);

void write_scene_csv(const std::filesystem::path& path, const SceneReport& report);

// Conventional baseline on the label grid: cells holding at least tau_pc
// radar points are occupied, then the usual per-column free-space scan. No
// erosion.
FovLabel pointcloud_fov_baseline(const dsp::RadarPointCloud& cloud, std::size_t tau_pc = 1,
                                 const GridGeometry& grid = {});

// label | prediction | overlay, side by side with 2-pixel gaps. Overlay
// grey levels: TP 255, FN 170, FP 85, TN 0.
void write_triptych(const std::filesystem::path& path, const FovLabel& label,
                    const FovLabel& prediction);

}  // namespace radarseg::eval

#endif  // RADARSEG_EVAL_HPP_
