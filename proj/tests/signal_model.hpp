// Closed-form FMCW point-target samples used as a test oracle for the
// processing chain. Independent of the simulator in simworld.

#ifndef RADARSEG_TESTS_SIGNAL_MODEL_HPP_
#define RADARSEG_TESTS_SIGNAL_MODEL_HPP_

#include <cmath>
#include <complex>
#include <numbers>

#include "radarseg/radar_dsp.hpp"

namespace oracle {

struct PointTarget {
  double range_m = 0;
  double azimuth_deg = 0;
  double radial_velocity = 0;
  double amplitude = 1.0;
  double phase = 0.0;
};

inline void add_target(radarseg::dsp::AdcCube& cube, const PointTarget& t) {
  const auto& cfg = cube.config;
  const double two_pi = 2.0 * std::numbers::pi;
  const double fb = 2.0 * cfg.chirp_slope * t.range_m / radarseg::dsp::kSpeedOfLight;
  const double fd = 2.0 * t.radial_velocity / cfg.wavelength();
  const double d = cfg.virtual_spacing * cfg.wavelength();
  const double dphi = two_pi * d * std::sin(t.azimuth_deg * std::numbers::pi / 180.0) /
                      cfg.wavelength();
  for (std::size_t c = 0; c < cfg.num_channels; ++c) {
    for (std::size_t l = 0; l < cfg.num_chirps; ++l) {
      for (std::size_t n = 0; n < cfg.num_samples; ++n) {
        const double ph = two_pi * fb * double(n) * cfg.sample_interval +
                          two_pi * fd * double(l) * cfg.chirp_interval + double(c) * dphi +
                          t.phase;
        cube.data.at({c, l, n}) += std::polar(t.amplitude, ph);
      }
    }
  }
}

}  // namespace oracle

#endif  // RADARSEG_TESTS_SIGNAL_MODEL_HPP_
