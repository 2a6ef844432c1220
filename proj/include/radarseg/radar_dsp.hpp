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

#ifndef RADARSEG_RADAR_DSP_HPP_
#define RADARSEG_RADAR_DSP_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radarseg/tensor.hpp"

namespace radarseg::dsp {

inline constexpr double kSpeedOfLight = 299792458.0;

// Waveform and array parameters of a single-chip TDM-MIMO FMCW radar. The
// defaults describe a 3Tx x 4Rx device sampled into a 12x128x128 cube with
// 0.125 m range and 0.04 m/s Doppler resolution. Timing fields are derived
// from the resolutions so the simulator and the processing chain agree.
struct RadarConfig {
  std::size_t num_channels = 12;
  std::size_t num_chirps = 128;
  std::size_t num_samples = 128;
  double max_range = 12.0;          // m
  double max_doppler = 2.56;        // m/s
  double range_res = 0.125;         // m
  double doppler_res = 0.04;        // m/s
  double carrier_freq = 77e9;       // Hz
  double virtual_spacing = 0.5;     // element spacing in wavelengths
  double sample_interval = 0.4e-6;  // s
  double chirp_slope = 0.0;         // Hz/s, derived when zero
  double chirp_interval = 0.0;      // s, derived when zero

  double wavelength() const { return kSpeedOfLight / carrier_freq; }

  // Fills zero timing fields from the resolutions and checks invariants.
  // Throws std::invalid_argument on inconsistent parameters.
  void finalize();
  void validate() const;

  // Fractional bin positions predicted by the signal model.
  double range_bin(double range_m) const { return range_m / range_res; }
  double doppler_bin(double radial_velocity) const;
  double angle_bin(double azimuth_deg, std::size_t num_bins) const;

  bool operator==(const RadarConfig&) const = default;
};

RadarConfig default_radar_config();

// Raw samples, dims [channel, chirp, sample].
struct AdcCube {
  RadarConfig config;
  ComplexTensor data;

  void validate() const;
};

// Range-Doppler cube [channel, doppler, range]; Doppler is centered so zero
// velocity sits at bin num_chirps/2.
struct RdTensor {
  ComplexTensor data;
};

// Angle-Doppler-range cube [angle, doppler, range]; the angle axis is a DFT
// over the virtual channels, centered so boresight sits at bin C/2.
struct RaTensor {
  ComplexTensor data;
};

struct RadarPoint {
  double range_m = 0;
  double azimuth_deg = 0;
  double doppler_mps = 0;
  double power_db = 0;
};

using RadarPointCloud = std::vector<RadarPoint>;

enum class CfarKind { kCellAveraging, kGreatestOf, kOrderedStatistic };

struct CfarParams {
  CfarKind kind = CfarKind::kCellAveraging;
  std::size_t guard_cells = 2;  // per side
  std::size_t train_cells = 8;  // per side
  // Linear multiplier on the noise estimate. 20 (13 dB) puts square-law
  // noise at a false-alarm rate near 1e-6 for 16 averaged cells.
  double threshold_scale = 20.0;
  // 1-based rank into the sorted training cells of a full window. Zero
  // selects 3/4 of the training-cell count.
  std::size_t os_rank = 0;

  void validate() const;
  std::size_t effective_os_rank() const;
};

using Mask = DenseTensor<std::uint8_t>;

AdcCube make_adc_cube(const RadarConfig& cfg);

// Range FFT along samples, then centered Doppler FFT along chirps.
RdTensor adc_to_rd(const AdcCube& cube, bool window = false);

// Centered DFT over the 12 virtual channels.
RaTensor rd_to_ra(const RdTensor& rd);
RdTensor ra_to_rd(const RaTensor& ra);

// |angle x doppler x range| after the three transforms.
RealTensor rda_heatmap(const AdcCube& cube, bool window = false);

// One-dimensional CFAR along the last axis of a 2-D power map, applied per
// row. Edge cells use truncated, renormalized training windows. Throws
// std::invalid_argument when the row is too short for the window.
Mask cfar_detect(const RealTensor& power_map, const CfarParams& params);

// Keeps flagged cells that are maxima of `heatmap` over their 3x3x3
// neighbourhood, merging the spread of one target over adjacent bins.
Mask keep_local_peaks(const Mask& mask, const RealTensor& heatmap);

// Inverts the inter-channel phase model: the bin fixes the per-channel phase
// step, and the step fixes sin(azimuth). Returns nullopt when the implied
// sine leaves [-1, 1]. Throws std::out_of_range for bin >= num_bins.
std::optional<double> azimuth_from_bin(std::size_t bin, std::size_t num_bins,
                                       const RadarConfig& cfg);

RadarPointCloud detections_to_pointcloud(const Mask& mask, const RealTensor& heatmap,
                                         const RadarConfig& cfg);

// heatmap -> square-law power -> range CFAR -> peak grouping -> points.
RadarPointCloud conventional_pointcloud(const AdcCube& cube, const CfarParams& params,
                                        bool window = false);

inline constexpr const char* kPointCloudCsvHeader = "range_m,azimuth_deg,doppler_mps,power_db";

void write_pointcloud_csv(const std::filesystem::path& path, const RadarPointCloud& cloud);
RadarPointCloud read_pointcloud_csv(const std::filesystem::path& path);

}  // namespace radarseg::dsp

#endif  // RADARSEG_RADAR_DSP_HPP_
