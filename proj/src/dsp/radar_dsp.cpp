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

#include "radarseg/radar_dsp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"

namespace radarseg::dsp {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

void RadarConfig::finalize() {
  if (range_res <= 0 || doppler_res <= 0 || carrier_freq <= 0 || sample_interval <= 0) {
    throw std::invalid_argument("radar resolutions, carrier and sample interval must be > 0");
  }
  // range_res = c0 / (2 S N Ts)
  if (chirp_slope == 0.0) {
    chirp_slope = kSpeedOfLight /
                  (2.0 * range_res * static_cast<double>(num_samples) * sample_interval);
  }
  // doppler_res = lambda / (2 L Tc)
  if (chirp_interval == 0.0) {
    chirp_interval = wavelength() / (2.0 * static_cast<double>(num_chirps) * doppler_res);
  }
  validate();
}

void RadarConfig::validate() const {
  if (num_channels * num_chirps * num_samples == 0) {
    throw std::invalid_argument("radar cube extents must be positive");
  }
  if (!is_power_of_two(num_chirps) || !is_power_of_two(num_samples)) {
    throw std::invalid_argument("chirp and sample counts must be powers of two");
  }
  if (range_res <= 0 || doppler_res <= 0 || max_range <= 0 || max_doppler <= 0) {
    throw std::invalid_argument("radar ranges and resolutions must be > 0");
  }
  if (max_range / range_res > static_cast<double>(num_samples) + 1e-9) {
    throw std::invalid_argument("max_range / range_res exceeds the sample count");
  }
  if (!(wavelength() > 0) || virtual_spacing <= 0) {
    throw std::invalid_argument("wavelength and element spacing must be > 0");
  }
  if (chirp_slope <= 0 || chirp_interval <= 0 || sample_interval <= 0) {
    throw std::invalid_argument("radar timing is not finalized");
  }
  const double implied_range_res =
      kSpeedOfLight / (2.0 * chirp_slope * static_cast<double>(num_samples) * sample_interval);
  const double implied_doppler_res =
      wavelength() / (2.0 * static_cast<double>(num_chirps) * chirp_interval);
  if (!close_rel(implied_range_res, range_res, 1e-6) ||
      !close_rel(implied_doppler_res, doppler_res, 1e-6)) {
    throw std::invalid_argument("radar timing is inconsistent with the stated resolutions");
  }
}

double RadarConfig::doppler_bin(double radial_velocity) const {
  return static_cast<double>(num_chirps / 2) + radial_velocity / doppler_res;
}

double RadarConfig::angle_bin(double azimuth_deg, std::size_t num_bins) const {
  return static_cast<double>(num_bins / 2) +
         static_cast<double>(num_bins) * virtual_spacing * std::sin(azimuth_deg * kDegToRad);
}

RadarConfig default_radar_config() {
  RadarConfig cfg;
  cfg.finalize();
  return cfg;
}

void AdcCube::validate() const {
  const Shape expected{config.num_channels, config.num_chirps, config.num_samples};
  if (data.dims() != expected) {
    throw std::invalid_argument("ADC cube shape " + shape_to_string(data.dims()) +
                                " does not match config " + shape_to_string(expected));
  }
}

AdcCube make_adc_cube(const RadarConfig& cfg) {
  return AdcCube{cfg, ComplexTensor({cfg.num_channels, cfg.num_chirps, cfg.num_samples})};
}

RdTensor adc_to_rd(const AdcCube& cube, bool window) {
  cube.validate();
  const Window w = window ? Window::kHann : Window::kNone;
  auto range = fft_axis(cube.data, 2, w, false);
  return RdTensor{fft_axis(range, 1, w, true)};
}

RaTensor rd_to_ra(const RdTensor& rd) {
  if (rd.data.rank() != 3) throw std::invalid_argument("RD tensor must be rank 3");
  return RaTensor{dft_axis(rd.data, 0, true)};
}

RdTensor ra_to_rd(const RaTensor& ra) {
  if (ra.data.rank() != 3) throw std::invalid_argument("RA tensor must be rank 3");
  return RdTensor{dft_axis(ra.data, 0, true, true)};
}

RealTensor rda_heatmap(const AdcCube& cube, bool window) {
  return magnitude(rd_to_ra(adc_to_rd(cube, window)).data);
}

// ---------------------------------------------------------------------------
// CFAR

void CfarParams::validate() const {
  if (train_cells < 1) throw std::invalid_argument("CFAR needs at least one training cell");
  if (!(threshold_scale > 0)) throw std::invalid_argument("CFAR threshold scale must be > 0");
  if (kind == CfarKind::kOrderedStatistic) {
    const std::size_t k = effective_os_rank();
    if (k < 1 || k > 2 * train_cells) {
      throw std::invalid_argument("OS-CFAR rank must lie in [1, training cells]");
    }
  }
}

std::size_t CfarParams::effective_os_rank() const {
  if (os_rank != 0) return os_rank;
  return std::max<std::size_t>(1, (3 * 2 * train_cells) / 4);
}

Mask cfar_detect(const RealTensor& power_map, const CfarParams& params) {
  params.validate();
  if (power_map.rank() != 2) throw std::invalid_argument("CFAR expects a 2-D map");
  const std::size_t rows = power_map.extent(0);
  const std::size_t len = power_map.extent(1);
  const std::size_t g = params.guard_cells;
  const std::size_t t = params.train_cells;
  if (len <= 2 * (g + t)) {
    throw std::invalid_argument("CFAR window (" + std::to_string(2 * (g + t) + 1) +
                                " cells) does not fit a row of " + std::to_string(len));
  }
  const std::size_t full = 2 * t;
  const std::size_t rank = params.kind == CfarKind::kOrderedStatistic
                               ? params.effective_os_rank()
                               : 0;

  Mask mask(power_map.dims(), 0);
  std::vector<double> cells;
  cells.reserve(full);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = power_map.data().data() + r * len;
    for (std::size_t i = 0; i < len; ++i) {
      // Leading cells [i-g-t, i-g-1], lagging cells [i+g+1, i+g+t], clipped.
      double lead_sum = 0, lag_sum = 0;
      std::size_t lead_n = 0, lag_n = 0;
      cells.clear();
      if (i > g) {
        const std::size_t hi = i - g - 1;
        const std::size_t lo = i >= g + t ? i - g - t : 0;
        for (std::size_t k = lo; k <= hi; ++k) {
          lead_sum += row[k];
          ++lead_n;
          cells.push_back(row[k]);
        }
      }
      for (std::size_t k = i + g + 1; k <= i + g + t && k < len; ++k) {
        lag_sum += row[k];
        ++lag_n;
        cells.push_back(row[k]);
      }
      const std::size_t n = lead_n + lag_n;
      double noise = 0;
      switch (params.kind) {
        case CfarKind::kCellAveraging:
          noise = (lead_sum + lag_sum) / static_cast<double>(n);
          break;
        case CfarKind::kGreatestOf: {
          const double lead = lead_n ? lead_sum / static_cast<double>(lead_n) : 0.0;
          const double lag = lag_n ? lag_sum / static_cast<double>(lag_n) : 0.0;
          noise = std::max(lead, lag);
          break;
        }
        case CfarKind::kOrderedStatistic: {
          // Rank scaled to the truncated window.
          std::size_t k = (rank * n + full / 2) / full;
          k = std::clamp<std::size_t>(k, 1, n);
          std::nth_element(cells.begin(), cells.begin() + static_cast<long>(k - 1), cells.end());
          noise = cells[k - 1];
          break;
        }
      }
      if (row[i] > params.threshold_scale * noise) mask[r * len + i] = 1;
    }
  }
  return mask;
}

Mask keep_local_peaks(const Mask& mask, const RealTensor& heatmap) {
  if (mask.dims() != heatmap.dims() || heatmap.rank() != 3) {
    throw std::invalid_argument("peak grouping needs matching 3-D mask and heatmap");
  }
  const auto A = static_cast<long>(heatmap.extent(0));
  const auto D = static_cast<long>(heatmap.extent(1));
  const auto R = static_cast<long>(heatmap.extent(2));
  auto idx = [&](long a, long d, long r) { return static_cast<std::size_t>((a * D + d) * R + r); };
  Mask out(mask.dims(), 0);
  for (long a = 0; a < A; ++a) {
    for (long d = 0; d < D; ++d) {
      for (long r = 0; r < R; ++r) {
        if (!mask[idx(a, d, r)]) continue;
        const double v = heatmap[idx(a, d, r)];
        bool peak = true;
        for (long da = -1; da <= 1 && peak; ++da) {
          for (long dd = -1; dd <= 1 && peak; ++dd) {
            for (long dr = -1; dr <= 1; ++dr) {
              const long aa = a + da, ddd = d + dd, rr = r + dr;
              if (aa < 0 || aa >= A || ddd < 0 || ddd >= D || rr < 0 || rr >= R) continue;
              if (heatmap[idx(aa, ddd, rr)] > v) {
                peak = false;
                break;
              }
            }
          }
        }
        if (peak) out[idx(a, d, r)] = 1;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Angle and point conversion

std::optional<double> azimuth_from_bin(std::size_t bin, std::size_t num_bins,
                                       const RadarConfig& cfg) {
  if (bin >= num_bins) throw std::out_of_range("angle bin out of range");
  // Phase step between adjacent channels for this bin, then
  // sin(theta) = lambda * dphi / (2 pi d).
  const double dphi = 2.0 * std::numbers::pi *
                      (static_cast<double>(bin) - static_cast<double>(num_bins / 2)) /
                      static_cast<double>(num_bins);
  const double spacing_m = cfg.virtual_spacing * cfg.wavelength();
  const double s = cfg.wavelength() * dphi / (2.0 * std::numbers::pi * spacing_m);
  if (std::abs(s) > 1.0) return std::nullopt;
  return std::asin(s) * kRadToDeg;
}

RadarPointCloud detections_to_pointcloud(const Mask& mask, const RealTensor& heatmap,
                                         const RadarConfig& cfg) {
  if (mask.dims() != heatmap.dims() || heatmap.rank() != 3) {
    throw std::invalid_argument("mask and heatmap must share a 3-D shape");
  }
  const std::size_t A = heatmap.extent(0), D = heatmap.extent(1), R = heatmap.extent(2);
  RadarPointCloud cloud;
  for (std::size_t a = 0; a < A; ++a) {
    const auto az = azimuth_from_bin(a, A, cfg);
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t i = (a * D + d) * R + r;
        if (!mask[i]) continue;
        const double range = static_cast<double>(r) * cfg.range_res;
        // Points must satisfy |azimuth| < 90 and range <= max_range.
        if (!az || std::abs(*az) >= 90.0 || range > cfg.max_range) continue;
        RadarPoint p;
        p.range_m = range;
        p.azimuth_deg = *az;
        p.doppler_mps = (static_cast<double>(d) - static_cast<double>(D / 2)) * cfg.doppler_res;
        const double mag = heatmap[i];
        p.power_db = 10.0 * std::log10(mag * mag);
        cloud.push_back(p);
      }
    }
  }
  return cloud;
}

RadarPointCloud conventional_pointcloud(const AdcCube& cube, const CfarParams& params,
                                        bool window) {
  const RealTensor heat = rda_heatmap(cube, window);
  RealTensor power(heat.dims());
  for (std::size_t i = 0; i < heat.size(); ++i) power[i] = heat[i] * heat[i];
  const std::size_t rows = heat.extent(0) * heat.extent(1);
  Mask flat = cfar_detect(power.reshaped({rows, heat.extent(2)}), params);
  Mask mask = keep_local_peaks(flat.reshaped(heat.dims()), heat);
  return detections_to_pointcloud(mask, heat, cube.config);
}

// ---------------------------------------------------------------------------
// CSV

void write_pointcloud_csv(const std::filesystem::path& path, const RadarPointCloud& cloud) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << kPointCloudCsvHeader << '\n';
    out.precision(10);
    for (const auto& p : cloud) {
      out << p.range_m << ',' << p.azimuth_deg << ',' << p.doppler_mps << ',' << p.power_db
          << '\n';
    }
  });
}

RadarPointCloud read_pointcloud_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open point cloud " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kPointCloudCsvHeader) {
    throw DataError(path.string() + ": unexpected point cloud header");
  }
  RadarPointCloud cloud;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    RadarPoint p;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> p.range_m >> c1 >> p.azimuth_deg >> c2 >> p.doppler_mps >> c3 >> p.power_db) ||
        c1 != ',' || c2 != ',' || c3 != ',') {
      throw DataError(path.string() + ": malformed row '" + line + "'");
    }
    cloud.push_back(p);
  }
  return cloud;
}

}  // namespace radarseg::dsp
