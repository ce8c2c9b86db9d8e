#include <cstring>
#include <vector>

#include "doctest.h"
#include "ltbench/kernels.hpp"
#include "support.hpp"

using namespace lt;

namespace {

RowMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  CounterRng rng(seed);
  RowMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

bool bitwise_equal(const RowMatrix& a, const RowMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("gemm_nn matches Eigen and is identical across variants") {
  const auto a = random_matrix(67, 45, 1);
  const auto b = random_matrix(45, 301, 2);
  RowMatrix c1(67, 301), c2(67, 301);
  kernels::serial::gemm_nn(kernels::view(a), kernels::view(b), kernels::view(c1));
  kernels::parallel::gemm_nn(kernels::view(a), kernels::view(b), kernels::view(c2));
  CHECK(bitwise_equal(c1, c2));
  const RowMatrix ref = a * b;
  CHECK((ref - c1).cwiseAbs().maxCoeff() < 1e-12);

  kernels::serial::gemm_nn(kernels::view(a), kernels::view(b), kernels::view(c1), true);
  kernels::parallel::gemm_nn(kernels::view(a), kernels::view(b), kernels::view(c2), true);
  CHECK(bitwise_equal(c1, c2));
  CHECK((2.0 * ref - c1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gemm_tn matches Eigen and is identical across variants") {
  const auto a = random_matrix(130, 33, 3);
  const auto b = random_matrix(130, 70, 4);
  RowMatrix c1(33, 70), c2(33, 70);
  kernels::serial::gemm_tn(kernels::view(a), kernels::view(b), kernels::view(c1));
  kernels::parallel::gemm_tn(kernels::view(a), kernels::view(b), kernels::view(c2));
  CHECK(bitwise_equal(c1, c2));
  const RowMatrix ref = a.transpose() * b;
  CHECK((ref - c1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cosine features") {
  auto p1 = random_matrix(50, 20, 5);
  auto p2 = p1;
  std::vector<double> phase(20);
  for (std::size_t j = 0; j < phase.size(); ++j) phase[j] = 0.1 * static_cast<double>(j);
  kernels::serial::cosine_features(kernels::view(p1), phase, 0.5);
  kernels::parallel::cosine_features(kernels::view(p2), phase, 0.5);
  CHECK(bitwise_equal(p1, p2));
  const auto orig = random_matrix(50, 20, 5);
  CHECK(p1(3, 7) == doctest::Approx(0.5 * std::cos(orig(3, 7) + 0.7)).epsilon(1e-15));
}

TEST_CASE("simulate_batch serial and parallel agree bitwise") {
  const auto p = example_params();
  CounterRng rng(11);
  std::vector<TunnelInputs> xs(5000);
  for (auto& x : xs) x = test::random_inputs(rng);
  for (bool rounding : {false, true}) {
    std::vector<SensorReadings> a(xs.size()), b(xs.size());
    kernels::serial::simulate_batch(xs, p, SimulateOptions{rounding}, a);
    kernels::parallel::simulate_batch(xs, p, SimulateOptions{rounding}, b);
    CHECK(a == b);
    CHECK(a[17] == simulate_sensors(xs[17], p, SimulateOptions{rounding}));
  }
}
