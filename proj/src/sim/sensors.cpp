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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <cblas.h>

#include "radarseg/simworld.hpp"

namespace radarseg::sim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  double reflectivity = 0.0;
  int axis = 0;         // normal axis of the face that was hit
  double inward = 0.0;  // sign pointing into the material along that axis
};

// Exit distance from inside an axis-aligned volume; `axis` receives the
// axis of the face that is crossed.
double exit_distance(const Box& b, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                     int& axis) {
  const double lo[3] = {b.x_min, b.y_min, b.z_min};
  const double hi[3] = {b.x_max, b.y_max, b.z_max};
  double t = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    double ta = std::numeric_limits<double>::infinity();
    if (d[a] > 0) ta = (hi[a] - o[a]) / d[a];
    if (d[a] < 0) ta = (lo[a] - o[a]) / d[a];
    if (ta < t) {
      t = ta;
      axis = a;
    }
  }
  return std::max(t, 0.0);
}

std::optional<double> entry_distance(const Box& b, const Eigen::Vector3d& o,
                                     const Eigen::Vector3d& d, int* axis = nullptr) {
  const double lo[3] = {b.x_min, b.y_min, b.z_min};
  const double hi[3] = {b.x_max, b.y_max, b.z_max};
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a];
    double tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    if (ta > t0) {
      t0 = ta;
      if (axis) *axis = a;
    }
    t1 = std::min(t1, tb);
  }
  if (t1 < std::max(t0, 0.0)) return std::nullopt;
  return std::max(t0, 0.0);
}

Hit cast_ray_3d(const Scene& scene, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  Hit hit;
  if (scene.bounded) {
    int axis = 0;
    hit.t = exit_distance(scene.room, o, d, axis);
    hit.reflectivity = 0.6;
    hit.axis = axis;
    hit.inward = d[axis] > 0 ? 1.0 : -1.0;
  }
  for (const Box& b : scene.obstacles) {
    int axis = 0;
    if (auto t = entry_distance(b, o, d, &axis); t && *t < hit.t) {
      hit.t = *t;
      hit.reflectivity = 0.8;
      hit.axis = axis;
      hit.inward = d[axis] > 0 ? 1.0 : -1.0;
    }
  }
  return hit;
}

}  // namespace

LidarFrame lidar_scan(const Scene& scene, const PoseSE3& pose, const LidarParams& params,
                      std::uint64_t seed) {
  if (params.num_rings == 0 || params.num_beams == 0) {
    throw std::invalid_argument("lidar needs at least one ring and one beam");
  }
  if (!(params.noise_sigma >= 0) || !(params.max_range > 0) || !(params.relief_depth >= 0) ||
      !(params.relief_protrusion >= 0)) {
    throw std::invalid_argument("lidar noise and relief must be >= 0, max range > 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Vector3d origin_body(0.0, 0.0, params.mount_height);
  const Eigen::Vector3d origin = pose.apply(origin_body);

  LidarFrame frame;
  frame.points.reserve(params.num_rings * params.num_beams);
  for (std::size_t ring = 0; ring < params.num_rings; ++ring) {
    const double elev =
        params.num_rings == 1
            ? 0.0
            : params.min_elevation_deg + (params.max_elevation_deg - params.min_elevation_deg) *
                                             static_cast<double>(ring) /
                                             static_cast<double>(params.num_rings - 1);
    const double ce = std::cos(elev * kDeg), se = std::sin(elev * kDeg);
    for (std::size_t beam = 0; beam < params.num_beams; ++beam) {
      const double az = 2.0 * std::numbers::pi * static_cast<double>(beam) /
                        static_cast<double>(params.num_beams);
      const Eigen::Vector3d dir_body(ce * std::cos(az), ce * std::sin(az), se);
      const Eigen::Vector3d dir = pose.rotation * dir_body;
      const Hit hit = cast_ray_3d(scene, origin, dir);
      // Noise is drawn for every beam so the stream does not depend on hits.
      const double eps = params.noise_sigma * noise(rng);
      const Eigen::Vector3d jitter(unit(rng), unit(rng), unit(rng));
      if (!std::isfinite(hit.t) || hit.t > params.max_range) continue;
      const double r = std::max(hit.t + eps, 0.0);
      Eigen::Vector3d p = origin_body + r * dir_body;
      const double relief = params.relief_depth + params.relief_protrusion;
      if (relief > 0) {
        // Rough surface: the return comes from between the protrusion in
        // front of the nominal face and the depth behind it, and sideways by
        // up to half the relief, which also fills concave corners.
        Eigen::Vector3d shift = relief * (jitter.array() - 0.5).matrix();
        shift[hit.axis] = hit.inward * (relief * jitter[hit.axis] - params.relief_protrusion);
        p += pose.rotation.transpose() * shift;
      }
      frame.points.push_back({p.x(), p.y(), p.z(), 100.0 * hit.reflectivity * std::exp(-r / 30.0)});
    }
  }
  return frame;
}

std::vector<VisibleScatterer> visible_scatterers(const Scene& scene, const PoseSE3& pose,
                                                 const Eigen::Vector3d& velocity,
                                                 const dsp::RadarConfig& cfg,
                                                 const EchoParams& params) {
  const Eigen::Vector3d origin = pose.apply(Eigen::Vector3d(0.0, 0.0, params.mount_height));
  std::vector<VisibleScatterer> out;
  for (const Scatterer& s : scene.scatterers) {
    const Eigen::Vector3d w = Eigen::Vector3d(s.x, s.y, s.z) - origin;
    const double range = w.norm();
    if (range < 1e-3 || range > cfg.max_range) continue;
    const Eigen::Vector3d body = pose.rotation.transpose() * w;
    if (body.x() <= 0) continue;
    const double horiz = std::hypot(w.x(), w.y());
    if (horiz < 1e-9) continue;
    // Occluded when an obstacle footprint is entered before the scatterer.
    bool blocked = false;
    for (const Box& b : scene.obstacles) {
      const Eigen::Vector3d o2(origin.x(), origin.y(), 0.0);
      const Eigen::Vector3d d2(w.x() / horiz, w.y() / horiz, 0.0);
      Box flat = b;
      flat.z_min = -1.0;
      flat.z_max = 1.0;
      if (auto t = entry_distance(flat, o2, d2); t && *t < horiz - 1e-6) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    VisibleScatterer v;
    v.range_m = range;
    v.azimuth_deg = std::atan2(body.y(), body.x()) / kDeg;
    v.radial_velocity = -velocity.dot(w) / range;
    v.amplitude = s.reflectivity / (range * range);
    out.push_back(v);
  }
  return out;
}

dsp::AdcCube synthesize_echo(const std::vector<VisibleScatterer>& targets,
                             const dsp::RadarConfig& cfg, std::optional<double> snr_db,
                             std::uint64_t seed) {
  dsp::AdcCube cube = dsp::make_adc_cube(cfg);
  const auto& c = cube.config;
  const std::size_t nc = c.num_channels, nl = c.num_chirps, nn = c.num_samples;
  const double two_pi = 2.0 * std::numbers::pi;
  const double lambda = c.wavelength();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, two_pi);

  // The cube is a sum of separable terms ch[c] * chirp[l] * samp[n], i.e. a
  // complex matrix product [(c, l) x target] * [target x n], done in blocks.
  constexpr std::size_t kBlock = 256;
  std::vector<Complex> lhs(nc * nl * kBlock), rhs(kBlock * nn), ch(nc), chirp(nl);
  Complex* data = cube.data.data().data();
  double max_amp = 0.0;
  for (std::size_t first = 0; first < targets.size(); first += kBlock) {
    const std::size_t kb = std::min(kBlock, targets.size() - first);
    for (std::size_t k = 0; k < kb; ++k) {
      const auto& t = targets[first + k];
      const double phi0 = phase(rng);
      max_amp = std::max(max_amp, t.amplitude);
      const double fb = 2.0 * c.chirp_slope * t.range_m / dsp::kSpeedOfLight;
      const double fd = 2.0 * t.radial_velocity / lambda;
      const double dphi = two_pi * c.virtual_spacing * std::sin(t.azimuth_deg * kDeg);
      for (std::size_t i = 0; i < nc; ++i) ch[i] = std::polar(t.amplitude, phi0 + dphi * double(i));
      for (std::size_t l = 0; l < nl; ++l) chirp[l] = std::polar(1.0, two_pi * fd * double(l) * c.chirp_interval);
      for (std::size_t i = 0; i < nc; ++i) {
        for (std::size_t l = 0; l < nl; ++l) lhs[(i * nl + l) * kb + k] = ch[i] * chirp[l];
      }
      for (std::size_t n = 0; n < nn; ++n) {
        rhs[k * nn + n] = std::polar(1.0, two_pi * fb * double(n) * c.sample_interval);
      }
    }
    const Complex one(1.0, 0.0);
    cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(nc * nl),
                static_cast<int>(nn), static_cast<int>(kb), &one, lhs.data(), static_cast<int>(kb),
                rhs.data(), static_cast<int>(nn), &one, data, static_cast<int>(nn));
  }

  if (snr_db && max_amp > 0) {
    // Coherent gain over chirps and samples sets the per-sample noise power.
    const double sigma2 = max_amp * max_amp * double(nl * nn) / std::pow(10.0, *snr_db / 10.0);
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));
    for (auto& v : cube.data.data()) {
      const double re = g(rng);
      const double im = g(rng);
      v += Complex(re, im);
    }
  }
  return cube;
}

dsp::AdcCube radar_echo(const Scene& scene, const PoseSE3& pose, const Eigen::Vector3d& velocity,
                        const dsp::RadarConfig& cfg, const EchoParams& params,
                        std::uint64_t seed) {
  return synthesize_echo(visible_scatterers(scene, pose, velocity, cfg, params), cfg,
                         params.snr_db, seed);
}

}  // namespace radarseg::sim
