#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gradcheck.hpp"
#include "radarseg/errors.hpp"
#include "radarseg/nn/loss.hpp"
#include "radarseg/nn/optim.hpp"
#include "radarseg/nn/train.hpp"
#include "radarseg/nn/unet.hpp"

using namespace radarseg;
using namespace radarseg::nn;

namespace {

Tensor randn(Shape dims, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  Tensor t(std::move(dims));
  for (double& v : t.values()) v = g(rng);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Direct-sum cross-correlation, zero padded, stride 1.
Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t pad) {
  const std::size_t B = x.extent(0), C = x.extent(1), H = x.extent(2), W = x.extent(3);
  const std::size_t O = w.extent(0), k = w.extent(2);
  Tensor y({B, O, H, W});
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j) {
          double s = b[o];
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t u = 0; u < k; ++u)
              for (std::size_t v = 0; v < k; ++v) {
                const long ii = long(i + u) - long(pad), jj = long(j + v) - long(pad);
                if (ii < 0 || jj < 0 || ii >= long(H) || jj >= long(W)) continue;
                s += w.at({o, c, u, v}) * x.at({n, c, std::size_t(ii), std::size_t(jj)});
              }
          y.at({n, o, i, j}) = s;
        }
  return y;
}

// Each input pixel scatters weight[c, o] into its 2x2 output patch.
Tensor tconv_oracle(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t B = x.extent(0), C = x.extent(1), H = x.extent(2), W = x.extent(3);
  const std::size_t O = w.extent(1);
  Tensor y({B, O, 2 * H, 2 * W});
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t i = 0; i < 2 * H; ++i)
        for (std::size_t j = 0; j < 2 * W; ++j) y.at({n, o, i, j}) = b[o];
  for (std::size_t n = 0; n < B; ++n)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < H; ++i)
        for (std::size_t j = 0; j < W; ++j)
          for (std::size_t o = 0; o < O; ++o)
            for (std::size_t a = 0; a < 2; ++a)
              for (std::size_t d = 0; d < 2; ++d)
                y.at({n, o, 2 * i + a, 2 * j + d}) += w.at({c, o, a, d}) * x.at({n, c, i, j});
  return y;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Analytic gradients of L = <r, layer(x)> for x and the given params, then an
// FD comparison.
template <typename Layer>
gradcheck::Result check_layer(Layer& layer, Tensor& x, std::vector<Param*> params,
                              std::mt19937_64& rng, bool piecewise) {
  const Tensor y = layer.forward(x);
  const Tensor r = randn(y.dims(), rng);
  for (Param* p : params) std::fill(p->grad.values().begin(), p->grad.values().end(), 0.0);
  const Tensor dx = layer.backward(r);
  std::vector<gradcheck::Target> targets{{"input", x.data().data(), dx.values()}};
  for (Param* p : params) targets.push_back({p->name, p->value.data().data(), p->grad.values()});
  return gradcheck::check([&] { return dot(r, layer.forward(x)); }, targets, rng, 48, 1e-3,
                          piecewise);
}

std::vector<Param*> collect(auto& layer) {
  std::vector<Param*> out;
  layer.collect(out);
  return out;
}

// Fresh norms output exactly zero-mean channels, which parks the average
// branch of channel attention on its ReLU kink; checks run at generic points.
void randomize_norms(const std::vector<Param*>& params, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.5);
  for (Param* p : params) {
    const bool scale = p->name.ends_with(".scale"), shift = p->name.ends_with(".shift");
    if (!scale && !shift) continue;
    for (double& v : p->value.values()) v = (scale ? 1.0 : 0.0) + g(rng);
  }
}

}  // namespace

TEST_CASE("conv2d: identity kernel passes the input through") {
  std::mt19937_64 rng(1);
  Conv2d conv("c", 1, 1, 3, 1);
  conv.weight.value.at({0, 0, 1, 1}) = 1.0;
  const Tensor x = randn({2, 1, 6, 5}, rng);
  CHECK(conv.forward(x) == x);
}

TEST_CASE("conv2d: all-ones kernel counts taps") {
  Conv2d conv("c", 1, 1, 3, 1);
  std::fill(conv.weight.value.values().begin(), conv.weight.value.values().end(), 1.0);
  const Tensor y = conv.forward(Tensor({1, 1, 5, 5}, 1.0));
  CHECK(y.at({0, 0, 2, 2}) == 9.0);
  CHECK(y.at({0, 0, 1, 3}) == 9.0);
  CHECK(y.at({0, 0, 0, 0}) == 4.0);
  CHECK(y.at({0, 0, 4, 4}) == 4.0);
  CHECK(y.at({0, 0, 0, 4}) == 4.0);
  CHECK(y.at({0, 0, 0, 2}) == 6.0);
}

TEST_CASE("conv2d: matches the direct-sum oracle for 1x1, 3x3 and 7x7") {
  std::mt19937_64 rng(2);
  for (std::size_t k : {1u, 3u, 7u}) {
    Conv2d conv("c", 3, 4, k, k / 2);
    conv.init(rng);
    conv.bias.value = randn({4}, rng);
    const Tensor x = randn({2, 3, 9, 6}, rng);
    CHECK(max_abs_diff(conv.forward(x), conv_oracle(x, conv.weight.value, conv.bias.value, k / 2)) <
          1e-12);
  }
}

TEST_CASE("conv2d: rejects channel mismatch and non-4D input") {
  Conv2d conv("c", 3, 4, 3, 1);
  CHECK_THROWS_AS(conv.forward(Tensor({1, 2, 4, 4})), std::invalid_argument);
  CHECK_THROWS_AS(conv.forward(Tensor({3, 4, 4})), std::invalid_argument);
  CHECK_THROWS_AS(Conv2d("c", 1, 1, 3, 0), std::invalid_argument);
}

TEST_CASE("conv2d: finite-difference gradients") {
  std::mt19937_64 rng(3);
  for (std::size_t k : {3u, 7u, 1u}) {
    Conv2d conv("c", 3, 5, k, k / 2);
    conv.init(rng);
    conv.bias.value = randn({5}, rng);
    Tensor x = randn({2, 3, 8, 7}, rng);
    const auto res = check_layer(conv, x, collect(conv), rng, false);
    CAPTURE(k);
    CAPTURE(res.worst);
    CHECK(res.max_rel_error <= 1e-4);
  }
}

TEST_CASE("transpose conv: oracle, zero weights, gradients") {
  std::mt19937_64 rng(4);
  ConvTranspose2x2 up("u", 4, 3);
  CHECK(up.forward(randn({2, 4, 3, 5}, rng)) == Tensor({2, 3, 6, 10}, 0.0));
  up.init(rng);
  up.bias.value = randn({3}, rng);
  Tensor x = randn({2, 4, 3, 5}, rng);
  CHECK(max_abs_diff(up.forward(x), tconv_oracle(x, up.weight.value, up.bias.value)) < 1e-12);
  const auto res = check_layer(up, x, collect(up), rng, false);
  CAPTURE(res.worst);
  CHECK(res.max_rel_error <= 1e-4);
}

TEST_CASE("instance norm: statistics, constant channel, gradients") {
  std::mt19937_64 rng(5);
  InstanceNorm2d norm("n", 3);
  const Tensor x = randn({2, 3, 10, 12}, rng, 5.0);
  const Tensor y = norm.forward(x);
  const std::size_t hw = 120;
  for (std::size_t bc = 0; bc < 6; ++bc) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < hw; ++i) m += y[bc * hw + i];
    m /= hw;
    for (std::size_t i = 0; i < hw; ++i) v += (y[bc * hw + i] - m) * (y[bc * hw + i] - m);
    v /= hw;
    CHECK(std::abs(m) <= 1e-9);
    CHECK(std::abs(v - 1.0) <= 1e-6);
  }
  const Tensor z = norm.forward(Tensor({1, 3, 4, 4}, 7.5));
  for (double v : z.values()) CHECK(v == 0.0);

  norm.scale.value = randn({3}, rng);
  norm.shift.value = randn({3}, rng);
  Tensor xs = randn({2, 3, 6, 5}, rng);
  const auto res = check_layer(norm, xs, collect(norm), rng, false);
  CAPTURE(res.worst);
  CHECK(res.max_rel_error <= 1e-4);
  CHECK_THROWS_AS(norm.forward(Tensor({1, 3, 1, 1})), std::invalid_argument);
}

TEST_CASE("spatial attention: one channel makes max and mean maps equal") {
  std::mt19937_64 rng(6);
  SpatialAttention sa("s", 7);
  sa.init(rng);
  const Tensor x = randn({1, 1, 9, 9}, rng);
  const Tensor y1 = sa.forward(x);
  // Swapping the kernels for the max and mean maps changes nothing.
  auto params = collect(sa);
  Tensor& w = params[0]->value;
  for (std::size_t i = 0; i < 49; ++i) std::swap(w[i], w[49 + i]);
  CHECK(max_abs_diff(sa.forward(x), y1) < 1e-12);
}

TEST_CASE("spatial attention: gate in (0,1), shape kept, gradients") {
  std::mt19937_64 rng(7);
  SpatialAttention sa("s", 7);
  sa.init(rng);
  Tensor x = randn({2, 5, 8, 8}, rng);
  const Tensor y = sa.forward(x);
  CHECK(y.dims() == x.dims());
  for (double g : sa.gate().values()) CHECK((g > 0.0 && g < 1.0));
  const auto res = check_layer(sa, x, collect(sa), rng, true);
  CAPTURE(res.worst);
  CHECK(res.max_rel_error <= 1e-4);
  CHECK(res.checked >= 48);
}

TEST_CASE("channel attention: symmetry, range, errors, gradients") {
  std::mt19937_64 rng(8);
  ChannelAttention ca("a", 8, 4);
  // Identical channels give a uniform gate when the bottleneck treats all
  // channels alike; random weights break that symmetry.
  std::fill(ca.fc1.value.values().begin(), ca.fc1.value.values().end(), 0.3);
  std::fill(ca.fc2.value.values().begin(), ca.fc2.value.values().end(), -0.2);
  Tensor plane = randn({1, 1, 5, 5}, rng);
  Tensor same({1, 8, 5, 5});
  for (std::size_t c = 0; c < 8; ++c)
    for (std::size_t i = 0; i < 25; ++i) same[c * 25 + i] = plane[i];
  ca.forward(same);
  for (std::size_t c = 1; c < 8; ++c) CHECK(ca.gate()[c] == ca.gate()[0]);
  ca.init(rng);

  Tensor x = randn({2, 8, 6, 6}, rng);
  const Tensor y = ca.forward(x);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t c = 0; c < 8; ++c) {
      const double g = ca.gate()[b * 8 + c];
      CHECK((g > 0.0 && g < 1.0));
      CHECK(std::abs(y.at({b, c, 3, 2}) - g * x.at({b, c, 3, 2})) < 1e-15);
    }
  const auto res = check_layer(ca, x, collect(ca), rng, true);
  CAPTURE(res.worst);
  CHECK(res.max_rel_error <= 1e-4);
  CHECK_THROWS_AS(ChannelAttention("a", 6, 4), std::invalid_argument);
  CHECK_THROWS_AS(ChannelAttention("a", 6, 0), std::invalid_argument);
}

TEST_CASE("avg pool: constants survive, odd sizes rejected") {
  AvgPool2 pool;
  const Tensor y = pool.forward(Tensor({1, 2, 4, 6}, 3.25));
  CHECK(y.dims() == Shape{1, 2, 2, 3});
  for (double v : y.values()) CHECK(v == 3.25);
  CHECK_THROWS_AS(pool.forward(Tensor({1, 1, 3, 4})), std::invalid_argument);
}

TEST_CASE("down and up blocks: shape algebra") {
  ModelConfig cfg;
  DownBlock down("d", 16, cfg);
  CHECK(down.forward(Tensor({1, 16, 128, 128}, 0.5)).dims() == Shape{1, 32, 64, 64});
  UpBlock up("u", 64, cfg);
  const Tensor y = up.forward(Tensor({1, 64, 32, 32}, 0.1), Tensor({1, 32, 64, 64}, 0.2));
  CHECK(y.dims() == Shape{1, 32, 64, 64});
  CHECK_THROWS_AS(up.forward(Tensor({1, 64, 32, 32}), Tensor({1, 32, 32, 32})),
                  std::invalid_argument);
}

TEST_CASE("down and up blocks: finite-difference gradients") {
  std::mt19937_64 rng(9);
  for (Attention att : {Attention::kSpatial, Attention::kChannel, Attention::kNone}) {
    ModelConfig cfg;
    cfg.attention = att;
    CAPTURE(to_string(att));
    DownBlock down("d", 4, cfg);
    down.init(rng);
    randomize_norms(collect(down), rng);
    Tensor x = randn({2, 4, 8, 8}, rng);
    auto res = check_layer(down, x, collect(down), rng, true);
    CAPTURE(res.worst);
    CHECK(res.max_rel_error <= 1e-4);

    UpBlock up("u", 8, cfg);
    up.init(rng);
    randomize_norms(collect(up), rng);
    Tensor xu = randn({2, 8, 4, 4}, rng);
    Tensor skip = randn({2, 4, 8, 8}, rng);
    const Tensor y = up.forward(xu, skip);
    const Tensor r = randn(y.dims(), rng);
    auto params = collect(up);
    for (Param* p : params) std::fill(p->grad.values().begin(), p->grad.values().end(), 0.0);
    Tensor dskip;
    const Tensor dx = up.backward(r, dskip);
    std::vector<gradcheck::Target> targets{{"x", xu.data().data(), dx.values()},
                                           {"skip", skip.data().data(), dskip.values()}};
    for (Param* p : params) targets.push_back({p->name, p->value.data().data(), p->grad.values()});
    res = gradcheck::check([&] { return dot(r, up.forward(xu, skip)); }, targets, rng, 32, 1e-3,
                           true);
    CAPTURE(res.worst);
    CHECK(res.max_rel_error <= 1e-4);
  }
}

TEST_CASE("unet: shapes, range, purity, attention variants") {
  std::mt19937_64 rng(10);
  ModelConfig cfg;
  cfg.base_channels = 4;
  for (Attention att : {Attention::kSpatial, Attention::kChannel, Attention::kNone}) {
    cfg.attention = att;
    UNet net(cfg);
    net.init(11);
    Tensor x = randn({3, 24, 128, 128}, rng);
    // Sample 2 repeats sample 0.
    std::copy_n(x.values().begin(), 24 * 128 * 128, x.values().begin() + 2 * 24 * 128 * 128);
    const Tensor p = net.forward(x);
    CHECK(p.dims() == Shape{3, 128, 128});
    bool in_range = true;
    for (double v : p.values()) in_range = in_range && v > 0.0 && v < 1.0;
    CHECK(in_range);
    const std::size_t plane = 128 * 128;
    CHECK(std::equal(p.values().begin(), p.values().begin() + plane,
                     p.values().begin() + 2 * plane));
    const Tensor alone = net.forward(x.reshaped({3 * 24, 128, 128}).reshaped({3, 24, 128, 128}));
    CHECK(alone == p);
    Tensor one({1, 24, 128, 128});
    std::copy_n(x.values().begin() + 24 * plane, 24 * plane, one.values().begin());
    const Tensor p1 = net.forward(one);
    CHECK(std::equal(p1.values().begin(), p1.values().end(), p.values().begin() + plane));
  }
  UNet net(cfg);
  CHECK_THROWS_AS(net.forward(Tensor({1, 23, 128, 128})), std::invalid_argument);
  CHECK_THROWS_AS(net.forward(Tensor({1, 24, 100, 128})), std::invalid_argument);
  ModelConfig bad = cfg;
  bad.depth = 4;
  CHECK_THROWS_AS(UNet{bad}, ConfigError);
  bad = cfg;
  bad.base_channels = 2;
  CHECK_THROWS_AS(UNet{bad}, ConfigError);
}

TEST_CASE("unet: end-to-end finite-difference gradients") {
  std::mt19937_64 rng(12);
  ModelConfig cfg;
  cfg.in_channels = 2;
  cfg.base_channels = 4;
  cfg.attention = Attention::kChannel;
  UNet net(cfg);
  net.init(13);
  randomize_norms(net.params(), rng);
  const Tensor x = randn({2, 2, 16, 16}, rng);
  const Tensor r = randn({2, 16, 16}, rng);
  net.forward(x);
  net.zero_grad();
  net.backward(r);
  std::vector<gradcheck::Target> targets;
  for (Param* p : net.params()) targets.push_back({p->name, p->value.data().data(), p->grad.values()});
  const auto res =
      gradcheck::check([&] { return dot(r, net.forward(x)); }, targets, rng, 6, 1e-3, true);
  CAPTURE(res.worst);
  CHECK(res.max_rel_error <= 1e-4);
}

TEST_CASE("seg_loss: closed forms") {
  const LossConfig cfg;
  Tensor y({2, 4, 4}, 0.0);
  for (std::size_t i = 0; i < y.size(); i += 2) y[i] = 1.0;
  LossValue half = seg_loss(Tensor(y.dims(), 0.5), y, cfg);
  CHECK(std::abs(half.bce - std::log(2.0)) <= 1e-12);

  const LossValue perfect = seg_loss(y, y, cfg);
  CHECK(perfect.dice == 0.0);
  CHECK(std::abs(perfect.bce + std::log(1.0 - 1e-7)) < 1e-15);
  CHECK(perfect.total < 1e-7);
  CHECK_THROWS_AS(seg_loss(Tensor({2, 4, 5}), y, cfg), std::invalid_argument);

  LossConfig bad;
  bad.bce_weight = bad.dice_weight = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("seg_loss: non-negative and FD gradient through the sigmoid") {
  std::mt19937_64 rng(14);
  std::bernoulli_distribution coin(0.4);
  for (int rep = 0; rep < 5; ++rep) {
    Tensor logits = randn({3, 6, 6}, rng, 2.0);
    Tensor y(logits.dims());
    for (double& v : y.values()) v = coin(rng) ? 1.0 : 0.0;
    Sigmoid sig;
    const LossValue lv = seg_loss(sig.forward(logits), y);
    CHECK(lv.total >= 0.0);
    const Tensor dz = sig.backward(lv.grad);
    std::vector<gradcheck::Target> t{{"logits", logits.data().data(), dz.values()}};
    const auto res = gradcheck::check(
        [&] { return seg_loss(Sigmoid().forward(logits), y).total; }, t, rng, 108);
    CHECK(res.max_rel_error <= 1e-5);
  }
}

TEST_CASE("adam: hand-evaluated recurrence") {
  AdamConfig cfg;
  cfg.lr = 0.1;
  {
    Param z("z", {3});
    Adam fresh({&z}, cfg);
    fresh.step(cfg.lr);
    CHECK(z.value == Tensor({3}, 0.0));
  }
  Param p("w", {1});
  Adam opt({&p}, cfg);
  p.grad[0] = 1.0;
  opt.step(cfg.lr);
  const double u1 = p.value[0];
  CHECK(u1 == doctest::Approx(-0.1).epsilon(1e-6));
  opt.step(cfg.lr);
  const double u2 = p.value[0] - u1;
  CHECK(std::abs(u2) <= std::abs(u1) * 1.01);
  CHECK(opt.steps() == 2);

  p.grad[0] = std::nan("");
  const double before = p.value[0];
  CHECK_THROWS_AS(opt.step(cfg.lr), NumericalError);
  CHECK(p.value[0] == before);
  CHECK(cfg.lr_at_epoch(2) == doctest::Approx(0.1 * 0.95 * 0.95));
}

namespace {

// Small learnable task: the label is 1 where the first input channel is positive.
SampleSet toy_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  SampleSet set{{2, 16, 16}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.id = i;
    s.input.resize(2 * 256);
    s.label = FovLabel(16, 16);
    for (std::size_t k = 0; k < 256; ++k) {
      s.input[k] = float(g(rng));
      s.input[256 + k] = float(g(rng));
      s.label.set(k / 16, k % 16, s.input[k] > 0);
    }
    set.samples.push_back(std::move(s));
  }
  return set;
}

}  // namespace

TEST_CASE("train: bookkeeping, determinism, learning, checkpoints") {
  ModelConfig mc;
  mc.in_channels = 2;
  mc.base_channels = 4;
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 4;
  tc.seed = 5;
  const SampleSet data = toy_set(16, 1);
  SampleSet tr, va;
  split_train_val(data, tr, va);
  CHECK(tr.samples.size() == 13);
  CHECK(va.samples.size() == 3);

  UNet net(mc);
  auto r1 = train(net, data, {}, tc, {});
  CHECK(r1.optimizer_steps == 4);

  tc.epochs = 6;
  tc.adam.lr = 0.01;
  const auto dir = std::filesystem::temp_directory_path() / "radarseg_test_train";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  UNet a(mc), b(mc);
  const auto ha = train(a, tr, va, tc, {}, dir).history;
  const auto hb = train(b, tr, va, tc, {}).history;
  REQUIRE(ha.size() == 6);
  for (std::size_t i = 0; i < ha.size(); ++i) {
    CHECK(ha[i].train_loss == hb[i].train_loss);
    CHECK(ha[i].val_loss == hb[i].val_loss);
    CHECK(ha[i].val_iou == hb[i].val_iou);
  }
  CHECK(ha.back().train_loss < ha.front().train_loss);

  std::ifstream hist(dir / "history.csv");
  std::string header;
  std::getline(hist, header);
  CHECK(header == "epoch,train_loss,val_loss,val_iou");

  Checkpoint ck = load_checkpoint(dir / "checkpoint.rckp");
  CHECK(ck.metadata.at("epoch") == 6);
  const auto pa = predict(a, va);
  const auto pc = predict(*ck.net, va);
  REQUIRE(pa.size() == 3);
  CHECK(pa[1].values == pc[1].values);

  CHECK_THROWS_AS(load_checkpoint(dir / "missing.rckp"), DataError);
  std::ofstream(dir / "junk.rckp") << "not a checkpoint";
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.rckp"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("train: a NaN input aborts with the batch id") {
  ModelConfig mc;
  mc.in_channels = 2;
  mc.base_channels = 4;
  SampleSet data = toy_set(8, 2);
  data.samples[5].input[3] = std::nanf("");
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 4;
  UNet net(mc);
  try {
    train(net, data, {}, tc, {});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("batch") != std::string::npos);
  }
}
