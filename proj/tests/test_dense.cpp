#include <cmath>
#include <vector>

#include "doctest.h"
#include "ltbench/dense.hpp"
#include "ltbench/errors.hpp"
#include "ltbench/rng.hpp"

using namespace lt;

namespace {

DenseNet net_of(std::vector<std::size_t> dims, std::vector<Activation> acts, std::uint64_t seed = 0) {
  return make_dense_net(dims, acts, seed);
}

RowMatrixF random_f(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  CounterRng rng(seed);
  RowMatrixF m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return m;
}

}  // namespace

TEST_CASE("identity layer passes input through") {
  auto net = net_of({3, 3}, {Activation::identity});
  net.layers[0].weights = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  net.layers[0].bias = {0, 0, 0};
  RowMatrix x(2, 3);
  x << 1.5, -2, 3, 0.25, 7, -8;
  CHECK(forward(net, x) == x);
}

TEST_CASE("zero weights give the final bias") {
  auto net = net_of({4, 6, 2}, {Activation::relu, Activation::identity});
  for (auto& l : net.layers) std::fill(l.weights.begin(), l.weights.end(), 0.0f);
  net.layers[1].bias = {0.5f, -1.25f};
  RowMatrix x = RowMatrix::Random(5, 4);
  const auto y = forward(net, x);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(y(i, 0) == 0.5);
    CHECK(y(i, 1) == -1.25);
  }
}

TEST_CASE("two-layer composition by hand") {
  // h = relu(W1^T x + b1), y = W2^T h + b2 with x = (1, 2).
  auto net = net_of({2, 2, 1}, {Activation::relu, Activation::identity});
  net.layers[0].weights = {1.0f, -1.0f,   // x0 -> h0, h1
                           0.5f, 0.25f};  // x1 -> h0, h1
  net.layers[0].bias = {0.0f, -1.0f};
  net.layers[1].weights = {2.0f, 3.0f};
  net.layers[1].bias = {0.5f};
  RowMatrix x(1, 2);
  x << 1.0, 2.0;
  // h0 = 1 + 1 = 2, h1 = relu(-1 + 0.5 - 1) = 0, y = 4 + 0 + 0.5
  CHECK(forward(net, x)(0, 0) == 4.5);

  net.layers[0].activation = Activation::leaky_relu;
  // h1 = 0.01 * -1.5
  CHECK(forward(net, x)(0, 0) == doctest::Approx(4.5 + 3.0 * -0.015).epsilon(1e-15));
}

TEST_CASE("shape errors") {
  auto net = net_of({3, 2}, {Activation::identity});
  CHECK_THROWS_AS(forward(net, RowMatrix::Zero(2, 4)), ShapeError);
  net.layers[0].bias.pop_back();
  CHECK_THROWS_AS(validate_net(net), ShapeError);
  auto chained = net_of({3, 2, 2}, {Activation::relu, Activation::identity});
  chained.layers[1].in = 5;
  CHECK_THROWS_AS(validate_net(chained), ShapeError);
}

TEST_CASE("He-uniform init") {
  const auto net = net_of({100, 50}, {Activation::relu}, 3);
  const float bound = static_cast<float>(std::sqrt(6.0 / 100.0));
  for (float w : net.layers[0].weights) CHECK(std::abs(w) <= bound);
  for (float b : net.layers[0].bias) CHECK(b == 0.0f);
  CHECK(net == net_of({100, 50}, {Activation::relu}, 3));
  CHECK_FALSE(net == net_of({100, 50}, {Activation::relu}, 4));
  CHECK(net.parameter_count() == 100 * 50 + 50);
}

TEST_CASE("linear target is fitted to high precision") {
  const auto x = random_f(256, 3, 1);
  RowMatrixF w(3, 2);
  w << 0.5f, -1.0f, 2.0f, 0.25f, -0.75f, 1.5f;
  const RowMatrixF y = x * w;
  auto net = net_of({3, 2}, {Activation::identity}, 2);
  TrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 200;
  cfg.batch_size = 32;
  const auto res = train_mse(net, x, y, cfg);
  REQUIRE(res.loss_history.size() == 200);
  const RowMatrix pred = predict(res.net, x);
  const double mse = (pred - y.cast<double>()).squaredNorm() / static_cast<double>(y.size());
  CHECK(mse < 1e-6);

  // Agreement with the closed-form least-squares solution.
  Eigen::MatrixXd xa(256, 4);
  xa << x.cast<double>(), Eigen::VectorXd::Ones(256);
  const Eigen::MatrixXd sol = xa.colPivHouseholderQr().solve(y.cast<double>());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) CHECK(res.net.layers[0].weights[i * 2 + j] == doctest::Approx(sol(i, j)).epsilon(1e-3));
}

TEST_CASE("zero learning rate leaves weights unchanged") {
  const auto x = random_f(64, 4, 3);
  const auto y = random_f(64, 2, 4);
  const auto net = net_of({4, 8, 2}, {Activation::relu, Activation::identity}, 5);
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.epochs = 5;
  cfg.batch_size = 64;
  const auto res = train_mse(net, x, y, cfg);
  CHECK(res.net == net);
  for (double l : res.loss_history) CHECK(l == doctest::Approx(res.loss_history.front()).epsilon(1e-12));
}

TEST_CASE("training is reproducible") {
  const auto x = random_f(100, 4, 6);
  const auto y = random_f(100, 3, 7);
  const auto net = net_of({4, 16, 3}, {Activation::leaky_relu, Activation::identity}, 8);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seed = 9;
  const auto a = train_mse(net, x, y, cfg);
  const auto b = train_mse(net, x, y, cfg);
  CHECK(a.net == b.net);
  CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("diverging training raises NonFinite") {
  const auto x = random_f(32, 2, 1);
  RowMatrixF y = random_f(32, 1, 2);
  y(0, 0) = std::numeric_limits<float>::infinity();
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train_mse(net_of({2, 1}, {Activation::identity}), x, y, cfg), NonFinite);
}

TEST_CASE("gradient matches central differences") {
  // 2 -> 1 -> 2 -> 1: 3 + 4 + 3 parameters.
  auto net = net_of({2, 1, 2, 1}, {Activation::leaky_relu, Activation::leaky_relu, Activation::identity}, 0);
  REQUIRE(net.parameter_count() == 10);
  CounterRng rng(0);
  for (auto& l : net.layers) {
    for (auto& w : l.weights) w = static_cast<float>(rng.uniform(0.2, 1.0));
    for (auto& b : l.bias) b = static_cast<float>(rng.uniform(0.1, 0.5));
  }
  RowMatrix x(4, 2), y(4, 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(0.1, 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(-1.0, 1.0);

  Gradients g;
  mse_and_gradient(net, x, y, g);
  const double h = 1e-3;
  double worst = 0.0;
  auto probe = [&](float& param, double analytic) {
    const float saved = param;
    Gradients scratch;
    param = static_cast<float>(saved + h);
    const double up_arg = static_cast<double>(param) - saved;
    const double up = mse_and_gradient(net, x, y, scratch);
    param = static_cast<float>(saved - h);
    const double down_arg = saved - static_cast<double>(param);
    const double down = mse_and_gradient(net, x, y, scratch);
    param = saved;
    const double numeric = (up - down) / (up_arg + down_arg);
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t i = 0; i < net.layers[l].weights.size(); ++i) probe(net.layers[l].weights[i], g.weights[l][i]);
    for (std::size_t i = 0; i < net.layers[l].bias.size(); ++i) probe(net.layers[l].bias[i], g.bias[l][i]);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("Adam with zero gradient only applies weight decay") {
  auto net = net_of({3, 2}, {Activation::identity}, 1);
  net.layers[0].bias = {0.5f, -0.25f};
  const auto before = net;
  auto state = AdamState::for_net(net, 1e-2, 0.1);
  Gradients g;
  g.weights = {std::vector<double>(6, 0.0)};
  g.bias = {std::vector<double>(2, 0.0)};
  const int steps = 3;
  for (int s = 0; s < steps; ++s) adam_step(net, state, g);
  const double factor = std::pow(1.0 - 1e-2 * 0.1, steps);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(net.layers[0].weights[i] == doctest::Approx(before.layers[0].weights[i] * factor).epsilon(1e-6));
  }
  CHECK(state.step == steps);
}

TEST_CASE("weight container round trip and corruption") {
  auto net = net_of({5, 7, 3}, {Activation::relu, Activation::identity}, 4);
  net.input_scale = {1.0f, 0.5f, 0.25f, 2.0f, 3.0f};
  const auto bytes = save_weights(net);
  CHECK(bytes[0] == 'L');
  CHECK(bytes[3] == 'N');
  CHECK(load_weights(bytes) == net);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  CHECK_THROWS_AS(load_weights(truncated), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(load_weights(magic), FormatError);
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  CHECK_THROWS_AS(load_weights(flipped), FormatError);
  CHECK_THROWS_AS(load_weights(std::vector<std::uint8_t>{}), FormatError);
}
