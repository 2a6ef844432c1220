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

#include "radarseg/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <cblas.h>

namespace radarseg::nn {

namespace {

void uniform_fill(Tensor& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (double& v : t.values()) v = u(rng);
}

// col[(c * k + ky) * k + kx][oy * W + ox] = x[c][oy + ky - pad][ox + kx - pad]
void im2col(const double* x, std::size_t C, std::size_t H, std::size_t W, std::size_t k,
            std::size_t pad, double* col) {
  const long h = static_cast<long>(H), w = static_cast<long>(W), p = static_cast<long>(pad);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        double* row = col + ((c * k + ky) * k + kx) * H * W;
        const long dy = static_cast<long>(ky) - p, dx = static_cast<long>(kx) - p;
        for (long oy = 0; oy < h; ++oy) {
          const long iy = oy + dy;
          double* out = row + oy * w;
          if (iy < 0 || iy >= h) {
            std::fill(out, out + w, 0.0);
            continue;
          }
          const double* in = x + (c * H + static_cast<std::size_t>(iy)) * W;
          const long lo = std::max(0L, -dx), hi = std::min(w, w - dx);
          std::fill(out, out + std::min(lo, w), 0.0);
          for (long ox = lo; ox < hi; ++ox) out[ox] = in[ox + dx];
          if (hi < w) std::fill(out + std::max(hi, 0L), out + w, 0.0);
        }
      }
    }
  }
}

void col2im(const double* col, std::size_t C, std::size_t H, std::size_t W, std::size_t k,
            std::size_t pad, double* dx_out) {
  const long h = static_cast<long>(H), w = static_cast<long>(W), p = static_cast<long>(pad);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double* row = col + ((c * k + ky) * k + kx) * H * W;
        const long dy = static_cast<long>(ky) - p, dx = static_cast<long>(kx) - p;
        for (long oy = 0; oy < h; ++oy) {
          const long iy = oy + dy;
          if (iy < 0 || iy >= h) continue;
          double* in = dx_out + (c * H + static_cast<std::size_t>(iy)) * W;
          const double* g = row + oy * w;
          const long lo = std::max(0L, -dx), hi = std::min(w, w - dx);
          for (long ox = lo; ox < hi; ++ox) in[ox + dx] += g[ox];
        }
      }
    }
  }
}

}  // namespace

void require_bchw(const Tensor& t, const char* what) {
  if (t.rank() != 4) {
    throw std::invalid_argument(std::string(what) + ": expected [batch, channels, height, width], got " +
                                shape_to_string(t.dims()));
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, std::size_t in_channels, std::size_t out_channels,
               std::size_t kernel, std::size_t pad, bool bias)
    : weight(name + ".weight", {out_channels, in_channels, kernel, kernel}),
      bias(name + ".bias", {out_channels}),
      in_(in_channels),
      out_(out_channels),
      k_(kernel),
      pad_(pad),
      has_bias_(bias) {
  if (2 * pad + 1 != kernel) {
    throw std::invalid_argument("conv2d supports odd kernels with same padding only");
  }
}

void Conv2d::init(std::mt19937_64& rng) {
  uniform_fill(weight.value, std::sqrt(6.0 / static_cast<double>(in_ * k_ * k_)), rng);
  std::fill(bias.value.values().begin(), bias.value.values().end(), 0.0);
}

void Conv2d::collect(std::vector<Param*>& out) {
  out.push_back(&weight);
  if (has_bias_) out.push_back(&bias);
}

Tensor Conv2d::forward(const Tensor& x) {
  require_bchw(x, "conv2d");
  if (x.extent(1) != in_) {
    throw std::invalid_argument("conv2d: expected " + std::to_string(in_) + " input channels, got " +
                                std::to_string(x.extent(1)));
  }
  x_ = x;
  const std::size_t B = x.extent(0), H = x.extent(2), W = x.extent(3), HW = H * W;
  const std::size_t K = in_ * k_ * k_;
  Tensor y({B, out_, H, W});
  std::vector<double> col(K * HW);
  for (std::size_t b = 0; b < B; ++b) {
    const double* xb = x.data().data() + b * in_ * HW;
    double* yb = y.data().data() + b * out_ * HW;
    const double* src = xb;
    if (k_ != 1) {
      im2col(xb, in_, H, W, k_, pad_, col.data());
      src = col.data();
    }
    if (has_bias_) {
      for (std::size_t o = 0; o < out_; ++o) std::fill(yb + o * HW, yb + (o + 1) * HW, bias.value[o]);
    }
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, int(out_), int(HW), int(K), 1.0,
                weight.value.data().data(), int(K), src, int(HW), has_bias_ ? 1.0 : 0.0, yb,
                int(HW));
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const std::size_t B = x_.extent(0), H = x_.extent(2), W = x_.extent(3), HW = H * W;
  if (dy.dims() != Shape{B, out_, H, W}) throw std::invalid_argument("conv2d backward: shape mismatch");
  const std::size_t K = in_ * k_ * k_;
  Tensor dx(x_.dims(), 0.0);
  std::vector<double> col(K * HW), dcol(K * HW);
  for (std::size_t b = 0; b < B; ++b) {
    const double* xb = x_.data().data() + b * in_ * HW;
    const double* gb = dy.data().data() + b * out_ * HW;
    double* dxb = dx.data().data() + b * in_ * HW;
    const double* src = xb;
    if (k_ != 1) {
      im2col(xb, in_, H, W, k_, pad_, col.data());
      src = col.data();
    }
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, int(out_), int(K), int(HW), 1.0, gb,
                int(HW), src, int(HW), 1.0, weight.grad.data().data(), int(K));
    if (has_bias_) {
      for (std::size_t o = 0; o < out_; ++o) {
        double s = 0;
        for (std::size_t i = 0; i < HW; ++i) s += gb[o * HW + i];
        bias.grad[o] += s;
      }
    }
    double* dst = k_ == 1 ? dxb : dcol.data();
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, int(K), int(HW), int(out_), 1.0,
                weight.value.data().data(), int(K), gb, int(HW), 0.0, dst, int(HW));
    if (k_ != 1) col2im(dcol.data(), in_, H, W, k_, pad_, dxb);
  }
  return dx;
}

// ------------------------------------------------------ ConvTranspose2x2

ConvTranspose2x2::ConvTranspose2x2(std::string name, std::size_t in_channels,
                                   std::size_t out_channels)
    : weight(name + ".weight", {in_channels, out_channels, 2, 2}),
      bias(name + ".bias", {out_channels}),
      in_(in_channels),
      out_(out_channels) {}

void ConvTranspose2x2::init(std::mt19937_64& rng) {
  // Each output pixel sees exactly one tap per input channel.
  uniform_fill(weight.value, std::sqrt(6.0 / static_cast<double>(in_)), rng);
  std::fill(bias.value.values().begin(), bias.value.values().end(), 0.0);
}

void ConvTranspose2x2::collect(std::vector<Param*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

Tensor ConvTranspose2x2::forward(const Tensor& x) {
  require_bchw(x, "transpose conv");
  if (x.extent(1) != in_) throw std::invalid_argument("transpose conv: input channel mismatch");
  x_ = x;
  const std::size_t B = x.extent(0), H = x.extent(2), W = x.extent(3), HW = H * W;
  const std::size_t M = out_ * 4;
  Tensor y({B, out_, 2 * H, 2 * W});
  std::vector<double> t(M * HW);
  for (std::size_t b = 0; b < B; ++b) {
    // t[(o, a, c), ij] = sum_i W[i, (o, a, c)] x[i, ij]
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, int(M), int(HW), int(in_), 1.0,
                weight.value.data().data(), int(M), x.data().data() + b * in_ * HW, int(HW), 0.0,
                t.data(), int(HW));
    double* yb = y.data().data() + b * out_ * 4 * HW;
    for (std::size_t o = 0; o < out_; ++o) {
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t c = 0; c < 2; ++c) {
          const double* tr = t.data() + ((o * 2 + a) * 2 + c) * HW;
          for (std::size_t i = 0; i < H; ++i) {
            double* yr = yb + (o * 2 * H + 2 * i + a) * 2 * W + c;
            for (std::size_t j = 0; j < W; ++j) yr[2 * j] = tr[i * W + j] + bias.value[o];
          }
        }
      }
    }
  }
  return y;
}

Tensor ConvTranspose2x2::backward(const Tensor& dy) {
  const std::size_t B = x_.extent(0), H = x_.extent(2), W = x_.extent(3), HW = H * W;
  if (dy.dims() != Shape{B, out_, 2 * H, 2 * W}) {
    throw std::invalid_argument("transpose conv backward: shape mismatch");
  }
  const std::size_t M = out_ * 4;
  Tensor dx(x_.dims(), 0.0);
  std::vector<double> t(M * HW);
  for (std::size_t b = 0; b < B; ++b) {
    const double* gb = dy.data().data() + b * M * HW;
    for (std::size_t o = 0; o < out_; ++o) {
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t c = 0; c < 2; ++c) {
          double* tr = t.data() + ((o * 2 + a) * 2 + c) * HW;
          for (std::size_t i = 0; i < H; ++i) {
            const double* gr = gb + (o * 2 * H + 2 * i + a) * 2 * W + c;
            for (std::size_t j = 0; j < W; ++j) {
              tr[i * W + j] = gr[2 * j];
              bias.grad[o] += gr[2 * j];
            }
          }
        }
      }
    }
    const double* xb = x_.data().data() + b * in_ * HW;
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, int(in_), int(M), int(HW), 1.0, xb,
                int(HW), t.data(), int(HW), 1.0, weight.grad.data().data(), int(M));
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, int(in_), int(HW), int(M), 1.0,
                weight.value.data().data(), int(M), t.data(), int(HW), 0.0,
                dx.data().data() + b * in_ * HW, int(HW));
  }
  return dx;
}

// --------------------------------------------------------- InstanceNorm2d

InstanceNorm2d::InstanceNorm2d(std::string name, std::size_t channels, double eps)
    : scale(name + ".scale", {channels}), shift(name + ".shift", {channels}),
      channels_(channels), eps_(eps) {
  std::fill(scale.value.values().begin(), scale.value.values().end(), 1.0);
}

void InstanceNorm2d::collect(std::vector<Param*>& out) {
  out.push_back(&scale);
  out.push_back(&shift);
}

Tensor InstanceNorm2d::forward(const Tensor& x) {
  require_bchw(x, "instance norm");
  if (x.extent(1) != channels_) throw std::invalid_argument("instance norm: channel mismatch");
  const std::size_t B = x.extent(0), HW = x.extent(2) * x.extent(3);
  if (HW < 2) throw std::invalid_argument("instance norm needs at least two pixels");
  xhat_ = Tensor(x.dims());
  inv_std_.assign(B * channels_, 0.0);
  Tensor y(x.dims());
  for (std::size_t bc = 0; bc < B * channels_; ++bc) {
    const double* in = x.data().data() + bc * HW;
    double mean = 0;
    for (std::size_t i = 0; i < HW; ++i) mean += in[i];
    mean /= double(HW);
    double var = 0;
    for (std::size_t i = 0; i < HW; ++i) var += (in[i] - mean) * (in[i] - mean);
    var /= double(HW);
    const double inv = 1.0 / std::sqrt(var + eps_);
    inv_std_[bc] = inv;
    const std::size_t c = bc % channels_;
    double* xh = xhat_.data().data() + bc * HW;
    double* out = y.data().data() + bc * HW;
    for (std::size_t i = 0; i < HW; ++i) {
      xh[i] = (in[i] - mean) * inv;
      out[i] = scale.value[c] * xh[i] + shift.value[c];
    }
  }
  return y;
}

Tensor InstanceNorm2d::backward(const Tensor& dy) {
  if (dy.dims() != xhat_.dims()) throw std::invalid_argument("instance norm backward: shape mismatch");
  const std::size_t B = dy.extent(0), HW = dy.extent(2) * dy.extent(3);
  Tensor dx(dy.dims());
  for (std::size_t bc = 0; bc < B * channels_; ++bc) {
    const std::size_t c = bc % channels_;
    const double* g = dy.data().data() + bc * HW;
    const double* xh = xhat_.data().data() + bc * HW;
    double sum_g = 0, sum_gx = 0;
    for (std::size_t i = 0; i < HW; ++i) {
      sum_g += g[i];
      sum_gx += g[i] * xh[i];
    }
    scale.grad[c] += sum_gx;
    shift.grad[c] += sum_g;
    const double k = scale.value[c] * inv_std_[bc] / double(HW);
    double* out = dx.data().data() + bc * HW;
    for (std::size_t i = 0; i < HW; ++i) {
      out[i] = k * (double(HW) * g[i] - sum_g - xh[i] * sum_gx);
    }
  }
  return dx;
}

// ------------------------------------------------------- SpatialAttention

SpatialAttention::SpatialAttention(std::string name, std::size_t kernel)
    : conv_(name + ".conv", 2, 1, kernel, kernel / 2, false) {}

Tensor SpatialAttention::forward(const Tensor& x) {
  require_bchw(x, "spatial attention");
  x_ = x;
  const std::size_t B = x.extent(0), C = x.extent(1), H = x.extent(2), W = x.extent(3);
  const std::size_t HW = H * W;
  Tensor feats({B, 2, H, W});
  argmax_.assign(B * HW, 0);
  for (std::size_t b = 0; b < B; ++b) {
    const double* xb = x.data().data() + b * C * HW;
    double* mx = feats.data().data() + b * 2 * HW;
    double* mean = mx + HW;
    for (std::size_t p = 0; p < HW; ++p) {
      double best = xb[p], sum = xb[p];
      std::size_t arg = 0;
      for (std::size_t c = 1; c < C; ++c) {
        const double v = xb[c * HW + p];
        sum += v;
        if (v > best) {
          best = v;
          arg = c;
        }
      }
      mx[p] = best;
      mean[p] = sum / double(C);
      argmax_[b * HW + p] = arg;
    }
  }
  gate_ = conv_.forward(feats);
  for (double& v : gate_.values()) v = sigmoid(v);
  Tensor y(x.dims());
  for (std::size_t b = 0; b < B; ++b) {
    const double* g = gate_.data().data() + b * HW;
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t off = (b * C + c) * HW;
      for (std::size_t p = 0; p < HW; ++p) y[off + p] = x[off + p] * g[p];
    }
  }
  return y;
}

Tensor SpatialAttention::backward(const Tensor& dy) {
  if (dy.dims() != x_.dims()) throw std::invalid_argument("spatial attention backward: shape mismatch");
  const std::size_t B = x_.extent(0), C = x_.extent(1), H = x_.extent(2), W = x_.extent(3);
  const std::size_t HW = H * W;
  Tensor ds({B, 1, H, W}, 0.0);
  Tensor dx(x_.dims());
  for (std::size_t b = 0; b < B; ++b) {
    const double* g = gate_.data().data() + b * HW;
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t off = (b * C + c) * HW;
      for (std::size_t p = 0; p < HW; ++p) {
        ds[b * HW + p] += dy[off + p] * x_[off + p];
        dx[off + p] = dy[off + p] * g[p];
      }
    }
    for (std::size_t p = 0; p < HW; ++p) ds[b * HW + p] *= g[p] * (1.0 - g[p]);
  }
  const Tensor dfeat = conv_.backward(ds);
  for (std::size_t b = 0; b < B; ++b) {
    const double* dmax = dfeat.data().data() + b * 2 * HW;
    const double* dmean = dmax + HW;
    for (std::size_t p = 0; p < HW; ++p) {
      dx[(b * C + argmax_[b * HW + p]) * HW + p] += dmax[p];
      const double share = dmean[p] / double(C);
      for (std::size_t c = 0; c < C; ++c) dx[(b * C + c) * HW + p] += share;
    }
  }
  return dx;
}

// ------------------------------------------------------- ChannelAttention

ChannelAttention::ChannelAttention(std::string name, std::size_t channels, std::size_t reduction)
    : fc1(name + ".fc1", {reduction && channels % reduction == 0 ? channels / reduction : 1, channels}),
      fc2(name + ".fc2", {channels, reduction && channels % reduction == 0 ? channels / reduction : 1}),
      channels_(channels),
      hidden_(reduction ? channels / reduction : 0) {
  if (reduction == 0 || channels % reduction != 0 || hidden_ == 0) {
    throw std::invalid_argument("channel attention: reduction must divide the channel count");
  }
}

void ChannelAttention::init(std::mt19937_64& rng) {
  uniform_fill(fc1.value, std::sqrt(6.0 / double(channels_)), rng);
  uniform_fill(fc2.value, std::sqrt(6.0 / double(hidden_)), rng);
}

void ChannelAttention::collect(std::vector<Param*>& out) {
  out.push_back(&fc1);
  out.push_back(&fc2);
}

Tensor ChannelAttention::forward(const Tensor& x) {
  require_bchw(x, "channel attention");
  if (x.extent(1) != channels_) throw std::invalid_argument("channel attention: channel mismatch");
  x_ = x;
  const std::size_t B = x.extent(0), C = channels_, HW = x.extent(2) * x.extent(3);
  avg_.assign(B * C, 0.0);
  max_.assign(B * C, 0.0);
  argmax_.assign(B * C, 0);
  za_.assign(B * hidden_, 0.0);
  zm_.assign(B * hidden_, 0.0);
  gate_ = Tensor({B, C});
  const double* w1 = fc1.value.data().data();
  const double* w2 = fc2.value.data().data();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      const double* in = x.data().data() + (b * C + c) * HW;
      double sum = 0, best = in[0];
      std::size_t arg = 0;
      for (std::size_t p = 0; p < HW; ++p) {
        sum += in[p];
        if (in[p] > best) {
          best = in[p];
          arg = p;
        }
      }
      avg_[b * C + c] = sum / double(HW);
      max_[b * C + c] = best;
      argmax_[b * C + c] = arg;
    }
    for (std::size_t h = 0; h < hidden_; ++h) {
      double a = 0, m = 0;
      for (std::size_t c = 0; c < C; ++c) {
        a += w1[h * C + c] * avg_[b * C + c];
        m += w1[h * C + c] * max_[b * C + c];
      }
      za_[b * hidden_ + h] = a;
      zm_[b * hidden_ + h] = m;
    }
    for (std::size_t c = 0; c < C; ++c) {
      double s = 0;
      for (std::size_t h = 0; h < hidden_; ++h) {
        s += w2[c * hidden_ + h] *
             (std::max(za_[b * hidden_ + h], 0.0) + std::max(zm_[b * hidden_ + h], 0.0));
      }
      gate_[b * C + c] = sigmoid(s);
    }
  }
  Tensor y(x.dims());
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    for (std::size_t p = 0; p < HW; ++p) y[bc * HW + p] = x[bc * HW + p] * gate_[bc];
  }
  return y;
}

Tensor ChannelAttention::backward(const Tensor& dy) {
  if (dy.dims() != x_.dims()) throw std::invalid_argument("channel attention backward: shape mismatch");
  const std::size_t B = x_.extent(0), C = channels_, HW = x_.extent(2) * x_.extent(3);
  const double* w1 = fc1.value.data().data();
  const double* w2 = fc2.value.data().data();
  double* g1 = fc1.grad.data().data();
  double* g2 = fc2.grad.data().data();
  Tensor dx(x_.dims());
  std::vector<double> ds(C), dza(hidden_), dzm(hidden_);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t off = (b * C + c) * HW;
      const double gate = gate_[b * C + c];
      double dg = 0;
      for (std::size_t p = 0; p < HW; ++p) {
        dg += dy[off + p] * x_[off + p];
        dx[off + p] = dy[off + p] * gate;
      }
      ds[c] = dg * gate * (1.0 - gate);
    }
    for (std::size_t h = 0; h < hidden_; ++h) {
      const double za = za_[b * hidden_ + h], zm = zm_[b * hidden_ + h];
      double dh = 0;
      for (std::size_t c = 0; c < C; ++c) {
        g2[c * hidden_ + h] += ds[c] * (std::max(za, 0.0) + std::max(zm, 0.0));
        dh += w2[c * hidden_ + h] * ds[c];
      }
      dza[h] = za > 0 ? dh : 0.0;
      dzm[h] = zm > 0 ? dh : 0.0;
    }
    for (std::size_t c = 0; c < C; ++c) {
      double davg = 0, dmax = 0;
      for (std::size_t h = 0; h < hidden_; ++h) {
        g1[h * C + c] += dza[h] * avg_[b * C + c] + dzm[h] * max_[b * C + c];
        davg += w1[h * C + c] * dza[h];
        dmax += w1[h * C + c] * dzm[h];
      }
      const std::size_t off = (b * C + c) * HW;
      const double share = davg / double(HW);
      for (std::size_t p = 0; p < HW; ++p) dx[off + p] += share;
      dx[off + argmax_[b * C + c]] += dmax;
    }
  }
  return dx;
}

// ------------------------------------------------- pooling and activations

Tensor AvgPool2::forward(const Tensor& x) {
  require_bchw(x, "avg pool");
  const std::size_t B = x.extent(0), C = x.extent(1), H = x.extent(2), W = x.extent(3);
  if (H % 2 || W % 2) throw std::invalid_argument("avg pool needs even height and width");
  in_dims_ = x.dims();
  Tensor y({B, C, H / 2, W / 2});
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    const double* in = x.data().data() + bc * H * W;
    double* out = y.data().data() + bc * H * W / 4;
    for (std::size_t i = 0; i < H / 2; ++i) {
      for (std::size_t j = 0; j < W / 2; ++j) {
        const double* p = in + 2 * i * W + 2 * j;
        out[i * W / 2 + j] = 0.25 * (p[0] + p[1] + p[W] + p[W + 1]);
      }
    }
  }
  return y;
}

Tensor AvgPool2::backward(const Tensor& dy) {
  const std::size_t B = in_dims_[0], C = in_dims_[1], H = in_dims_[2], W = in_dims_[3];
  if (dy.dims() != Shape{B, C, H / 2, W / 2}) throw std::invalid_argument("avg pool backward: shape mismatch");
  Tensor dx(in_dims_);
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    const double* g = dy.data().data() + bc * H * W / 4;
    double* out = dx.data().data() + bc * H * W;
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < W; ++j) out[i * W + j] = 0.25 * g[(i / 2) * (W / 2) + j / 2];
    }
  }
  return dx;
}

Tensor ReLU::forward(const Tensor& x) {
  Tensor y(x.dims());
  active_.assign(x.size(), false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    active_[i] = !(x[i] <= 0);  // NaN passes through so the loss sees it
    y[i] = active_[i] ? x[i] : 0.0;
  }
  return y;
}

Tensor ReLU::backward(const Tensor& dy) {
  if (dy.size() != active_.size()) throw std::invalid_argument("relu backward: shape mismatch");
  Tensor dx(dy.dims());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = active_[i] ? dy[i] : 0.0;
  return dx;
}

Tensor Sigmoid::forward(const Tensor& x) {
  y_ = Tensor(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) y_[i] = sigmoid(x[i]);
  return y_;
}

Tensor Sigmoid::backward(const Tensor& dy) {
  if (dy.size() != y_.size()) throw std::invalid_argument("sigmoid backward: shape mismatch");
  Tensor dx(y_.dims());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * y_[i] * (1.0 - y_[i]);
  return dx;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_bchw(a, "concat");
  require_bchw(b, "concat");
  if (a.extent(0) != b.extent(0) || a.extent(2) != b.extent(2) || a.extent(3) != b.extent(3)) {
    throw std::invalid_argument("concat: " + shape_to_string(a.dims()) + " and " +
                                shape_to_string(b.dims()) + " differ outside the channel axis");
  }
  const std::size_t B = a.extent(0), ca = a.extent(1), cb = b.extent(1);
  const std::size_t HW = a.extent(2) * a.extent(3);
  Tensor y({B, ca + cb, a.extent(2), a.extent(3)});
  for (std::size_t n = 0; n < B; ++n) {
    std::copy_n(a.data().data() + n * ca * HW, ca * HW, y.data().data() + n * (ca + cb) * HW);
    std::copy_n(b.data().data() + n * cb * HW, cb * HW,
                y.data().data() + (n * (ca + cb) + ca) * HW);
  }
  return y;
}

void split_channels(const Tensor& t, std::size_t first, Tensor& a, Tensor& b) {
  require_bchw(t, "split");
  const std::size_t B = t.extent(0), C = t.extent(1), H = t.extent(2), W = t.extent(3);
  if (first == 0 || first >= C) throw std::invalid_argument("split: bad channel boundary");
  const std::size_t HW = H * W;
  a = Tensor({B, first, H, W});
  b = Tensor({B, C - first, H, W});
  for (std::size_t n = 0; n < B; ++n) {
    std::copy_n(t.data().data() + n * C * HW, first * HW, a.data().data() + n * first * HW);
    std::copy_n(t.data().data() + (n * C + first) * HW, (C - first) * HW,
                b.data().data() + n * (C - first) * HW);
  }
}

}  // namespace radarseg::nn
