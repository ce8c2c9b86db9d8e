// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <vector>

#include "ltbench/kernels.hpp"
#include "ltbench/rng.hpp"

using namespace lt;

namespace {

RowMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  CounterRng rng(seed);
  RowMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

std::vector<TunnelInputs> random_inputs(std::size_t n) {
  CounterRng rng(7);
  std::vector<TunnelInputs> xs(n);
  for (auto& x : xs) {
    x.red = rng.uniform(0, 255);
    x.green = rng.uniform(0, 255);
    x.blue = rng.uniform(0, 255);
    x.theta1 = rng.uniform(-90, 90);
    x.theta2 = rng.uniform(-90, 90);
    x.diode_ir = {1, 1, 1};
    x.diode_vis = {1, 1, 1};
    x.t_ir = {2, 2, 3};
    x.t_vis = {2, 2, 3};
  }
  return xs;
}

template <bool Parallel>
void BM_gemm_nn(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto a = random_matrix(n, 256, 1);
  const auto b = random_matrix(256, 512, 2);
  RowMatrix c(n, 512);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::gemm_nn(kernels::view(a), kernels::view(b), kernels::view(c));
    } else {
      kernels::serial::gemm_nn(kernels::view(a), kernels::view(b), kernels::view(c));
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 256 * 512);
}

template <bool Parallel>
void BM_gemm_tn(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto a = random_matrix(n, 128, 3);
  const auto b = random_matrix(n, 256, 4);
  RowMatrix c(128, 256);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::gemm_tn(kernels::view(a), kernels::view(b), kernels::view(c));
    } else {
      kernels::serial::gemm_tn(kernels::view(a), kernels::view(b), kernels::view(c));
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 128 * 256);
}

template <bool Parallel>
void BM_cosine_features(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  auto proj = random_matrix(n, 512, 5);
  std::vector<double> phase(512, 0.25);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::cosine_features(kernels::view(proj), phase, 0.0625);
    } else {
      kernels::serial::cosine_features(kernels::view(proj), phase, 0.0625);
    }
    benchmark::DoNotOptimize(proj.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 512);
}

template <bool Parallel>
void BM_simulate_batch(benchmark::State& state) {
  const auto xs = random_inputs(static_cast<std::size_t>(state.range(0)));
  const auto p = example_params();
  std::vector<SensorReadings> out(xs.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::simulate_batch(xs, p, {}, out);
    } else {
      kernels::serial::simulate_batch(xs, p, {}, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}

}  // namespace

BENCHMARK(BM_gemm_nn<false>)->Name("gemm_nn/serial")->Arg(512)->Arg(4096);
BENCHMARK(BM_gemm_nn<true>)->Name("gemm_nn/parallel")->Arg(512)->Arg(4096);
BENCHMARK(BM_gemm_tn<false>)->Name("gemm_tn/serial")->Arg(4096);
BENCHMARK(BM_gemm_tn<true>)->Name("gemm_tn/parallel")->Arg(4096);
BENCHMARK(BM_cosine_features<false>)->Name("cosine_features/serial")->Arg(4096);
BENCHMARK(BM_cosine_features<true>)->Name("cosine_features/parallel")->Arg(4096);
BENCHMARK(BM_simulate_batch<false>)->Name("simulate_batch/serial")->Arg(100000);
BENCHMARK(BM_simulate_batch<true>)->Name("simulate_batch/parallel")->Arg(100000);

BENCHMARK_MAIN();
