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

#ifndef RADARSEG_TENSOR_HPP_
#define RADARSEG_TENSOR_HPP_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace radarseg {

using Complex = std::complex<double>;
using Shape = std::vector<std::size_t>;

std::size_t shape_product(const Shape& dims);
std::string shape_to_string(const Shape& dims);

// Dense row-major tensor. Every extent is at least one and the element count
// always equals the product of the extents.
template <typename T>
class DenseTensor {
 public:
  using value_type = T;

  DenseTensor() = default;

  explicit DenseTensor(Shape dims, T fill = T{})
      : dims_(std::move(dims)), data_(checked_size(dims_), fill) {}

  DenseTensor(Shape dims, std::vector<T> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    if (data_.size() != checked_size(dims_)) {
      throw std::invalid_argument("tensor data length " +
                                  std::to_string(data_.size()) +
                                  " does not match shape " +
                                  shape_to_string(dims_));
    }
  }

  const Shape& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return dims_.at(axis); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::initializer_list<std::size_t> index) const {
    if (index.size() != dims_.size()) {
      throw std::invalid_argument("index rank mismatch");
    }
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) {
      if (i >= dims_[axis]) throw std::out_of_range("tensor index out of range");
      flat = flat * dims_[axis] + i;
      ++axis;
    }
    return flat;
  }

  T& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  const T& at(std::initializer_list<std::size_t> index) const {
    return data_[offset(index)];
  }

  // Same data, new extents with equal product.
  DenseTensor reshaped(Shape dims) const { return DenseTensor(std::move(dims), data_); }

  bool operator==(const DenseTensor&) const = default;

 private:
  static std::size_t checked_size(const Shape& dims) {
    for (std::size_t d : dims) {
      if (d == 0) throw std::invalid_argument("tensor extents must be >= 1");
    }
    return shape_product(dims);
  }

  Shape dims_;
  std::vector<T> data_;
};

using RealTensor = DenseTensor<double>;
using ComplexTensor = DenseTensor<Complex>;

bool all_finite(const ComplexTensor& t);
bool all_finite(const RealTensor& t);

RealTensor magnitude(const ComplexTensor& t);

enum class Window { kNone, kHann };

bool is_power_of_two(std::size_t n);

// Radix-2 iterative FFT. Forward is the unnormalized DFT
// X[k] = sum_n x[n] exp(-2 pi i k n / N); inverse carries the 1/N factor.
// Throws std::invalid_argument unless the length is a power of two >= 2.
void fft_inplace(std::span<Complex> signal, bool inverse);
std::vector<Complex> fft_1d(std::span<const Complex> signal, bool inverse);

// O(N^2) DFT for lengths that are not powers of two (the 12-element angle
// axis). Same sign and scaling conventions as fft_1d.
std::vector<Complex> dft(std::span<const Complex> signal, bool inverse);

// Rotate by n/2 so the zero-frequency bin lands at index n/2.
void center_shift(std::span<Complex> lane);
// Inverse of center_shift (differs from it only for odd lengths).
void uncenter_shift(std::span<Complex> lane);

// Periodic Hann window, w[k] = 0.5 - 0.5 cos(2 pi k / n).
std::vector<double> hann_window(std::size_t n);

// Transforms every 1-D lane along `axis`. The window multiplies each lane
// before a forward transform. With `inverse`, a centered lane is first
// unshifted, so fft_axis(fft_axis(t, a, kNone, s), a, kNone, s, true) == t.
ComplexTensor fft_axis(const ComplexTensor& t, std::size_t axis,
                       Window window = Window::kNone, bool center = false,
                       bool inverse = false);

// Naive DFT along an arbitrary-length axis, with optional centering.
ComplexTensor dft_axis(const ComplexTensor& t, std::size_t axis, bool center,
                       bool inverse = false);

// RTEN binary format: "RTEN", u32 version, u8 dtype (0 real64, 1 complex
// pair of real64), u32 ndim, u64 dims, little-endian row-major payload.
inline constexpr std::uint32_t kRtenVersion = 1;

using AnyTensor = std::variant<RealTensor, ComplexTensor>;

void write_rten(std::ostream& out, const RealTensor& t);
void write_rten(std::ostream& out, const ComplexTensor& t);
AnyTensor read_rten(std::istream& in);

void write_rten(const std::filesystem::path& path, const RealTensor& t);
void write_rten(const std::filesystem::path& path, const ComplexTensor& t);
AnyTensor read_rten(const std::filesystem::path& path);
RealTensor read_real_rten(const std::filesystem::path& path);
ComplexTensor read_complex_rten(const std::filesystem::path& path);

}  // namespace radarseg

#endif  // RADARSEG_TENSOR_HPP_
