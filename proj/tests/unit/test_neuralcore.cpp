#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stiction/error.hpp"
#include "stiction/models.hpp"
#include "stiction/nn/adam.hpp"
#include "stiction/nn/gradcheck.hpp"
#include "stiction/nn/loss.hpp"
#include "stiction/nn/training.hpp"

using namespace stiction;
using namespace stiction::nn;

namespace {

std::vector<double> normals(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

// Label 1 iff the PV channel has a positive mean; easily separable.
WindowDataset toy_dataset(std::size_t n, std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    samples[i].input = normals(gen, rows * 2, 0.5);
    for (std::size_t r = 0; r < rows; ++r) samples[i].input[2 * r] += y ? 1.0 : -1.0;
    samples[i].label = y;
    samples[i].origin = static_cast<std::int64_t>(i) * 60;
  }
  WindowSpec spec;
  spec.model_len = static_cast<int>(rows);
  return split_normalize(samples, spec, DatasetMode::detect, make_minute(2024, 1, 1));
}

Network logistic_net(std::size_t rows, std::uint64_t seed) {
  Network net(Shape{rows, 2});
  net.add(std::make_unique<Flatten>(Shape{rows, 2}));
  net.add(std::make_unique<Dense>(Shape{1, rows * 2}, 1, Activation::sigmoid));
  net.initialize(seed);
  return net;
}

Batch random_batch(std::vector<std::vector<double>>& storage, std::size_t n, std::size_t width, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  storage.clear();
  Batch b;
  for (std::size_t i = 0; i < n; ++i) storage.push_back(normals(gen, width));
  for (std::size_t i = 0; i < n; ++i) {
    b.inputs.emplace_back(storage[i]);
    b.labels.push_back(static_cast<int>(gen() % 2));
  }
  return b;
}

}  // namespace

TEST_SUITE("neuralcore") {

TEST_CASE("conv identity kernel and bias-only output") {
  std::mt19937_64 gen(1);
  const auto x = Tensor2::from(10, 1, normals(gen, 10));
  const std::vector<double> k{0.0, 1.0, 0.0}, zero{0.0};
  const auto y = conv1d_apply(x, k, zero, 1, 3, Activation::none);
  for (std::size_t t = 0; t < 10; ++t) CHECK(y(t, 0) == x(t, 0));
  const std::vector<double> z3(3, 0.0), half{0.5};
  const auto c = conv1d_apply(x, z3, half, 1, 3, Activation::none);
  for (std::size_t t = 0; t < 10; ++t) CHECK(c(t, 0) == 0.5);
}

TEST_CASE("conv matches the triple-loop oracle") {
  std::mt19937_64 gen(2);
  const std::size_t T = 24, C = 2, F = 5, K = 3;
  const auto xv = normals(gen, T * C);
  const auto w = normals(gen, F * K * C);
  const auto b = normals(gen, F);
  const auto y = conv1d_apply(Tensor2::from(T, C, xv), w, b, F, K, Activation::none);
  const auto expected = oracle::conv_same(xv, T, C, w, b, F, K);
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(y.data[i] - expected[i]) < 1e-12);
  const auto r = conv1d_apply(Tensor2::from(T, C, xv), w, b, F, K, Activation::relu);
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(r.data[i] == std::max(0.0, y.data[i]));
}

TEST_CASE("dense layer") {
  const std::vector<double> x{1.5, -2.0, 3.0};
  std::vector<double> eye(9, 0.0);
  for (std::size_t i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  CHECK(dense_apply(x, eye, std::vector<double>(3, 0.0), Activation::none) == x);
  const auto s = dense_apply(x, std::vector<double>(6, 0.0), std::vector<double>(2, 0.0), Activation::sigmoid);
  CHECK(s == std::vector<double>{0.5, 0.5});

  std::mt19937_64 gen(3);
  const auto xr = normals(gen, 7), w = normals(gen, 4 * 7), b = normals(gen, 4);
  const auto y = dense_apply(xr, w, b, Activation::none);
  for (std::size_t j = 0; j < 4; ++j) {
    double acc = b[j];
    for (std::size_t i = 0; i < 7; ++i) acc += w[j * 7 + i] * xr[i];
    CHECK(std::abs(y[j] - acc) < 1e-12);
  }
}

TEST_CASE("LSTM with zero parameters") {
  const std::size_t C = 2, H = 3;
  const std::vector<double> w(4 * H * C, 0.0), u(4 * H * H, 0.0), b(4 * H, 0.0);
  const LstmWeights p{C, H, w, u, b};
  const std::vector<double> x{1.0, -1.0}, zero(H, 0.0), one(H, 1.0);
  const auto s0 = lstm_step(x, zero, zero, p);
  for (std::size_t j = 0; j < H; ++j) {
    CHECK(s0.h[j] == 0.0);
    CHECK(s0.c[j] == 0.0);
  }
  const auto s1 = lstm_step(x, zero, one, p);
  for (std::size_t j = 0; j < H; ++j) {
    CHECK(s1.c[j] == doctest::Approx(0.5));
    CHECK(s1.h[j] == doctest::Approx(0.5 * std::tanh(0.5)));
  }
}

TEST_CASE("large forget bias carries the cell state") {
  const std::size_t C = 1, H = 2;
  std::vector<double> w(4 * H * C, 0.0), u(4 * H * H, 0.0), b(4 * H, 0.0);
  for (std::size_t j = 0; j < H; ++j) b[H + j] = 50.0;
  const LstmWeights p{C, H, w, u, b};
  const std::vector<double> x{3.0}, h{0.0, 0.0}, c{0.7, -0.4};
  const auto s = lstm_step(x, h, c, p);
  CHECK(std::abs(1.0 - sigmoid(50.0)) < 1e-20);
  // Zero candidate weights: c_t = f c_prev + i tanh(0) = c_prev.
  CHECK(s.c[0] == 0.7);
  CHECK(s.c[1] == -0.4);
}

TEST_CASE("LSTM step and sequence match the scalar oracle") {
  std::mt19937_64 gen(4);
  const std::size_t C = 2, H = 5, T = 12;
  const auto w = normals(gen, 4 * H * C, 0.5), u = normals(gen, 4 * H * H, 0.5), b = normals(gen, 4 * H, 0.5);
  const LstmWeights p{C, H, w, u, b};
  const auto xs = normals(gen, T * C);
  std::vector<double> h(H, 0.0), c(H, 0.0), oh(H, 0.0), oc(H, 0.0);
  const auto seq = lstm_sequence(Tensor2::from(T, C, xs), p, true);
  const auto last = lstm_sequence(Tensor2::from(T, C, xs), p, false);
  for (std::size_t t = 0; t < T; ++t) {
    const std::vector<double> x(xs.begin() + static_cast<long>(t * C), xs.begin() + static_cast<long>((t + 1) * C));
    const auto s = lstm_step(x, h, c, p);
    oracle::lstm_scalar_step(x, oh, oc, w, u, b, C, H);
    for (std::size_t j = 0; j < H; ++j) {
      CHECK(std::abs(s.h[j] - oh[j]) < 1e-12);
      CHECK(std::abs(s.c[j] - oc[j]) < 1e-12);
      CHECK(seq(t, j) == s.h[j]);
    }
    h = s.h;
    c = s.c;
  }
  REQUIRE(last.rows == 1);
  for (std::size_t j = 0; j < H; ++j) CHECK(last(0, j) == h[j]);
}

TEST_CASE("activation ranges") {
  CHECK(sigmoid(0.0) == 0.5);
  for (double z : {-1e6, -40.0, -5.0, 0.3, 5.0, 40.0, 1e6}) {
    CHECK(sigmoid(z) >= 0.0);
    CHECK(sigmoid(z) <= 1.0);
  }
  for (double z : {-20.0, -1.0, 1.0, 20.0}) {
    CHECK(sigmoid(z) > 0.0);
    CHECK(sigmoid(z) < 1.0);
  }
  CHECK(sigmoid(1e6) == 1.0);  // saturates in double precision
  CHECK(relu(-3.0) == 0.0);
  CHECK(relu(2.5) == 2.5);
}

TEST_CASE("binary cross-entropy") {
  const std::vector<double> half{0.5};
  CHECK(bce_loss(half, std::vector<int>{1}).loss == doctest::Approx(std::log(2.0)));
  CHECK(bce_loss(half, std::vector<int>{0}).loss == doctest::Approx(std::log(2.0)));
  CHECK(bce_loss(half, std::vector<int>{1}, 2.0).loss == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(bce_loss(half, std::vector<int>{0}, 2.0).loss == doctest::Approx(std::log(2.0)));

  const std::vector<double> zero{0.0};
  const auto clamped = bce_loss(zero, std::vector<int>{1});
  CHECK(clamped.loss == doctest::Approx(-std::log(kProbabilityFloor)));
  CHECK(std::isfinite(clamped.loss));
  CHECK(clamped.grad[0] == 0.0);

  const std::vector<double> one{1.0};
  CHECK(bce_loss(one, std::vector<int>{1}).loss <= 1e-6);
  CHECK(bce_loss(zero, std::vector<int>{0}).loss <= 1e-6);

  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> q{u(gen)};
    CHECK(bce_loss(q, std::vector<int>{static_cast<int>(i % 2)}, 1.0 + u(gen)).loss >= 0.0);
  }
  CHECK_THROWS_AS(bce_loss(half, std::vector<int>{1, 0}), Error);
}

TEST_CASE("BCE gradient matches finite differences") {
  const std::vector<double> p{0.3, 0.8, 0.55, 0.02};
  const std::vector<int> y{1, 0, 1, 0};
  for (double w : {1.0, 2.5}) {
    const auto lg = bce_loss(p, y, w);
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto up = p, dn = p;
      up[i] += 1e-6;
      dn[i] -= 1e-6;
      const double fd = (bce_loss(up, y, w).loss - bce_loss(dn, y, w).loss) / 2e-6;
      CHECK(lg.grad[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("Adam update") {
  std::vector<double> theta{1.0, -2.0, 0.5}, m(3, 0.0), v(3, 0.0);
  const std::vector<double> g{0.3, -4.0, 0.0};
  adam_update(theta, g, m, v, 1, {});
  CHECK(theta[0] == doctest::Approx(1.0 - 0.001).epsilon(1e-6));
  CHECK(theta[1] == doctest::Approx(-2.0 + 0.001).epsilon(1e-6));
  CHECK(theta[2] == 0.5);

  std::vector<double> q{1.0}, mq{0.0}, vq{0.0};
  for (long t = 1; t <= 10; ++t) {
    const double before = std::abs(q[0]);
    const std::vector<double> gq{2.0 * q[0]};
    adam_update(q, gq, mq, vq, t, {});
    CHECK(std::abs(q[0]) < before);
  }

  std::vector<double> x{1.0}, mx{0.0}, vx{0.0};
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  for (long t = 1; t <= 2000; ++t) {
    const std::vector<double> gx{2.0 * x[0]};
    adam_update(x, gx, mx, vx, t, cfg);
  }
  CHECK(std::abs(x[0]) < 0.05);

  std::vector<double> short_m(2);
  CHECK_THROWS_AS(adam_update(theta, g, short_m, v, 2, {}), Error);
}

TEST_CASE("gradient check on a logistic model") {
  auto net = logistic_net(6, 5);
  std::vector<std::vector<double>> storage;
  const auto batch = random_batch(storage, 8, 12, 6);
  const auto r = finite_diff_grad_check(net, batch, 1e-5, 1.0);
  CHECK(r.parameters == 13);
  CHECK(r.max_rel_error < 1e-9);
}

TEST_CASE("gradient check on reduced CNN, LSTM and dense head") {
  // Parameters are jittered so no ReLU sits exactly at its kink (zero
  // biases feeding dead units do at initialisation).
  auto check = [](Network net, std::size_t rows, std::uint64_t seed, double step) {
    std::mt19937_64 gen(seed + 100);
    auto p = net.flat_params();
    for (auto& x : p) x += 0.1 * std::normal_distribution<double>()(gen);
    net.set_flat_params(p);
    std::vector<std::vector<double>> storage;
    const auto batch = random_batch(storage, 8, rows * 2, seed + 200);
    return finite_diff_grad_check(net, batch, step, 1.0).max_rel_error;
  };
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    CAPTURE(seed);
    CHECK(check(build(ArchitectureSpec::defaults(ModelKind::cnn).reduced(16), 24, seed), 24, seed, 1e-5) < 1e-4);
    Network mlp(Shape{24, 2});
    mlp.add(std::make_unique<Flatten>(Shape{24, 2}));
    mlp.add(std::make_unique<Dense>(Shape{1, 48}, 4, Activation::relu));
    mlp.add(std::make_unique<Dense>(Shape{1, 4}, 2, Activation::relu));
    mlp.add(std::make_unique<Dense>(Shape{1, 2}, 1, Activation::sigmoid));
    mlp.initialize(seed);
    CHECK(check(mlp, 24, seed, 1e-5) < 1e-4);
    // Some LSTM gradients are ~1e-8, below what a 1e-5 step resolves at a
    // loss of order 1; a 1e-4 step keeps rounding out of the comparison.
    CHECK(check(build(ArchitectureSpec::defaults(ModelKind::lstm).reduced(8), 6, seed), 6, seed, 1e-4) < 1e-4);
  }
}

TEST_CASE("early stopping tracker") {
  EarlyStopping es(3);
  CHECK(es.observe(1, 1.0));
  CHECK(es.observe(2, 0.9));
  CHECK_FALSE(es.observe(3, 0.9));  // equal is not an improvement
  CHECK_FALSE(es.should_stop());
  CHECK_FALSE(es.observe(4, 0.95));
  CHECK_FALSE(es.observe(5, 0.97));
  CHECK(es.should_stop());
  CHECK(es.best_epoch() == 2);
}

TEST_CASE("scripted validation losses stop training and restore the best epoch") {
  const auto data = toy_dataset(60, 4, 7);
  auto net = logistic_net(4, 8);
  const std::vector<double> script{1.0, 0.9, 0.95, 0.96, 0.97, 0.5, 0.4};
  std::vector<std::uint64_t> hashes;
  FitHooks hooks;
  hooks.val_loss_override = [&](int epoch, double) { return script[static_cast<std::size_t>(epoch - 1)]; };
  hooks.on_epoch_end = [&](int, const Network& n) { hashes.push_back(parameter_hash(n)); };
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.seed = 3;
  const auto h = fit(net, data, cfg, hooks);
  CHECK(h.epochs.size() == 5);
  CHECK(h.best_epoch == 2);
  CHECK(h.stopped_early);
  REQUIRE(hashes.size() == 5);
  CHECK(parameter_hash(net) == hashes[1]);
  CHECK(parameter_hash(net) != hashes[4]);
}

TEST_CASE("training is deterministic for a seed") {
  const auto data = toy_dataset(80, 6, 9);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.batch_size = 16;
  cfg.seed = 11;
  auto a = build(ArchitectureSpec::defaults(ModelKind::cnn).reduced(16), 6, 2);
  auto b = build(ArchitectureSpec::defaults(ModelKind::cnn).reduced(16), 6, 2);
  auto c = build(ArchitectureSpec::defaults(ModelKind::cnn).reduced(16), 6, 2);
  fit(a, data, cfg);
  cfg.policy = ExecutionPolicy::parallel;
  fit(b, data, cfg);
  cfg.seed = 12;
  fit(c, data, cfg);
  CHECK(parameter_hash(a) == parameter_hash(b));
  CHECK(parameter_hash(a) != parameter_hash(c));
}

TEST_CASE("separable toy problem is learnt") {
  const auto data = toy_dataset(200, 4, 13);
  auto net = logistic_net(4, 14);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.max_epochs = 300;
  cfg.patience = 299;
  cfg.batch_size = 16;
  fit(net, data, cfg);
  const auto batch = make_batch(data, 0, data.train_end);
  CHECK(batch_loss(net, batch, 1.0) < 0.1);
}

TEST_CASE("serial and parallel batch gradients are bit-identical") {
  for (auto kind : {ModelKind::cnn, ModelKind::lstm}) {
    auto net = build(ArchitectureSpec::defaults(kind).reduced(4), 24, 21);
    std::vector<std::vector<double>> storage;
    const auto batch = random_batch(storage, 64, 48, 22);
    std::vector<double> gs(net.param_count()), gp(net.param_count());
    const double ls = batch_gradient(net, batch, 1.3, gs, ExecutionPolicy::serial);
    const double lp = batch_gradient(net, batch, 1.3, gp, ExecutionPolicy::parallel);
    CHECK(ls == lp);
    CHECK(gs == gp);
  }
}

TEST_CASE("class weight helpers") {
  const std::vector<int> few_pos{1, 0, 0, 0};
  const std::vector<int> many_pos{1, 1, 1, 0};
  const std::vector<int> one_class{0, 0};
  CHECK(positive_class_weight(few_pos, 2.0) == 2.0);
  CHECK(positive_class_weight(many_pos, 2.0) == 0.5);
  CHECK(balanced_class_weight(few_pos) == 3.0);
  CHECK(balanced_class_weight(many_pos) == 3.0);
  CHECK(balanced_class_weight(one_class) == 1.0);
}

TEST_CASE("training rejects bad configuration") {
  TrainConfig cfg;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

}  // TEST_SUITE
