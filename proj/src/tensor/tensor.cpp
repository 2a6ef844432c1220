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

#include "radarseg/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace radarseg {

std::size_t shape_product(const Shape& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

std::string shape_to_string(const Shape& dims) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) ss << 'x';
    ss << dims[i];
  }
  ss << ']';
  return ss.str();
}

bool all_finite(const ComplexTensor& t) {
  return std::all_of(t.values().begin(), t.values().end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

bool all_finite(const RealTensor& t) {
  return std::all_of(t.values().begin(), t.values().end(),
                     [](double v) { return std::isfinite(v); });
}

RealTensor magnitude(const ComplexTensor& t) {
  RealTensor out(t.dims());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = std::abs(t[i]);
  return out;
}

bool is_power_of_two(std::size_t n) { return n >= 2 && std::has_single_bit(n); }

void fft_inplace(std::span<Complex> x, bool inverse) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft length " + std::to_string(n) +
                                " is not a power of two >= 2");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles evaluated directly rather than by recurrence to keep the
    // round-off at a few ulps for long transforms.
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(len);
      const Complex w(std::cos(angle), std::sin(angle));
      for (std::size_t start = 0; start < n; start += len) {
        const Complex u = x[start + k];
        const Complex v = x[start + k + half] * w;
        x[start + k] = u + v;
        x[start + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& z : x) z *= scale;
  }
}

std::vector<Complex> fft_1d(std::span<const Complex> signal, bool inverse) {
  std::vector<Complex> out(signal.begin(), signal.end());
  fft_inplace(out, inverse);
  return out;
}

std::vector<Complex> dft(std::span<const Complex> signal, bool inverse) {
  const std::size_t n = signal.size();
  if (n == 0) throw std::invalid_argument("dft of empty signal");
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc{};
    for (std::size_t m = 0; m < n; ++m) {
      // (k*m) mod n keeps the angle argument small and exact.
      const double angle = sign * 2.0 * std::numbers::pi *
                           static_cast<double>((k * m) % n) / static_cast<double>(n);
      acc += signal[m] * Complex(std::cos(angle), std::sin(angle));
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

void center_shift(std::span<Complex> lane) {
  std::rotate(lane.begin(), lane.begin() + (lane.size() - lane.size() / 2), lane.end());
}

void uncenter_shift(std::span<Complex> lane) {
  std::rotate(lane.begin(), lane.begin() + lane.size() / 2, lane.end());
}

std::vector<double> hann_window(std::size_t n) {
  if (n < 2) throw std::invalid_argument("hann window needs n >= 2");
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                static_cast<double>(n));
  }
  return w;
}

namespace {

template <typename LaneFn>
ComplexTensor transform_lanes(const ComplexTensor& t, std::size_t axis, LaneFn&& fn) {
  if (axis >= t.rank()) {
    throw std::invalid_argument("axis " + std::to_string(axis) +
                                " out of range for tensor of rank " +
                                std::to_string(t.rank()));
  }
  const Shape& dims = t.dims();
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= dims[i];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i];
  const std::size_t len = dims[axis];

  ComplexTensor out(dims);
  std::vector<Complex> lane(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      for (std::size_t k = 0; k < len; ++k) lane[k] = t[base + k * inner];
      fn(std::span<Complex>(lane));
      for (std::size_t k = 0; k < len; ++k) out[base + k * inner] = lane[k];
    }
  }
  return out;
}

}  // namespace

ComplexTensor fft_axis(const ComplexTensor& t, std::size_t axis, Window window,
                       bool center, bool inverse) {
  if (axis >= t.rank()) {
    throw std::invalid_argument("axis " + std::to_string(axis) + " out of range");
  }
  const std::size_t len = t.extent(axis);
  if (!is_power_of_two(len)) {
    throw std::invalid_argument("fft_axis extent " + std::to_string(len) +
                                " is not a power of two");
  }
  std::vector<double> w;
  if (window == Window::kHann && !inverse) w = hann_window(len);
  return transform_lanes(t, axis, [&](std::span<Complex> lane) {
    if (inverse) {
      if (center) uncenter_shift(lane);
      fft_inplace(lane, true);
      return;
    }
    if (!w.empty()) {
      for (std::size_t k = 0; k < lane.size(); ++k) lane[k] *= w[k];
    }
    fft_inplace(lane, false);
    if (center) center_shift(lane);
  });
}

ComplexTensor dft_axis(const ComplexTensor& t, std::size_t axis, bool center,
                       bool inverse) {
  return transform_lanes(t, axis, [&](std::span<Complex> lane) {
    if (inverse && center) uncenter_shift(lane);
    auto result = dft(lane, inverse);
    std::copy(result.begin(), result.end(), lane.begin());
    if (!inverse && center) center_shift(lane);
  });
}

// ---------------------------------------------------------------------------
// RTEN serialization

namespace {

constexpr char kMagic[4] = {'R', 'T', 'E', 'N'};

template <typename U>
void put_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(U));
  if (!in) throw std::runtime_error("truncated RTEN stream");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(bytes[i]) << (8 * i);
  }
  return value;
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

void write_header(std::ostream& out, std::uint8_t dtype, const Shape& dims) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kRtenVersion);
  put_le<std::uint8_t>(out, dtype);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) put_le<std::uint64_t>(out, d);
}

}  // namespace

void write_rten(std::ostream& out, const RealTensor& t) {
  write_header(out, 0, t.dims());
  for (double v : t.values()) put_f64(out, v);
}

void write_rten(std::ostream& out, const ComplexTensor& t) {
  write_header(out, 1, t.dims());
  for (const Complex& z : t.values()) {
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
}

AnyTensor read_rten(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kMagic)) {
    throw std::runtime_error("not an RTEN stream (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kRtenVersion) {
    throw std::runtime_error("unsupported RTEN version " + std::to_string(version));
  }
  const auto dtype = get_le<std::uint8_t>(in);
  const auto ndim = get_le<std::uint32_t>(in);
  if (ndim == 0 || ndim > 16) throw std::runtime_error("bad RTEN rank");
  Shape dims(ndim);
  for (auto& d : dims) {
    d = static_cast<std::size_t>(get_le<std::uint64_t>(in));
    if (d == 0) throw std::runtime_error("RTEN extent of zero");
  }
  const std::size_t n = shape_product(dims);
  if (dtype == 0) {
    std::vector<double> data(n);
    for (auto& v : data) v = get_f64(in);
    return RealTensor(std::move(dims), std::move(data));
  }
  if (dtype == 1) {
    std::vector<Complex> data(n);
    for (auto& z : data) {
      const double re = get_f64(in);
      const double im = get_f64(in);
      z = Complex(re, im);
    }
    return ComplexTensor(std::move(dims), std::move(data));
  }
  throw std::runtime_error("unknown RTEN dtype " + std::to_string(dtype));
}

}  // namespace radarseg
