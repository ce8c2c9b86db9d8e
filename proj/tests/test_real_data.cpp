// Supervised check on the published datasets. Needs network access and the
// extracted archives; skipped (exit code 77) unless LTBENCH_NETWORK_TESTS=1.
//
//   LTBENCH_CCRL_DIR    extracted lt_crl_benchmark_v1 dataset directory
//   LTBENCH_CITRIS_DIR  extracted temporal dataset directory

#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdlib>
#include <iostream>
#include <string>

#include "doctest.h"
#include "ltbench/dataset_io.hpp"
#include "ltbench/fetch.hpp"
#include "ltbench/supervised.hpp"

using namespace lt;

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

double real_r2(const std::string& dir) {
  const auto ds = read_dataset(dir, ReadOptions{false});
  SupervisedConfig cfg;
  cfg.epochs = 100;
  return supervised_check(ds, cfg).r2_mean;
}

}  // namespace

TEST_CASE("published archive downloads and verifies") {
  FetchOptions opts;
  opts.cache_dir = default_cache_dir();
  const auto r = fetch_remote("lt_crl_benchmark_v1", Registry::load_default(), opts);
  CHECK(std::filesystem::file_size(r.path) > 0);
}

TEST_CASE("supervised R2 on the real CCRL data") {
  const auto dir = env_or_empty("LTBENCH_CCRL_DIR");
  REQUIRE_MESSAGE(!dir.empty(), "set LTBENCH_CCRL_DIR to the extracted dataset");
  CHECK(std::abs(real_r2(dir) - 0.976) <= 0.03);
}

TEST_CASE("supervised R2 on the real temporal data") {
  const auto dir = env_or_empty("LTBENCH_CITRIS_DIR");
  REQUIRE_MESSAGE(!dir.empty(), "set LTBENCH_CITRIS_DIR to the extracted dataset");
  CHECK(std::abs(real_r2(dir) - 0.914) <= 0.03);
}

int main(int argc, char** argv) {
  if (env_or_empty("LTBENCH_NETWORK_TESTS") != "1") {
    std::cout << "skipped: set LTBENCH_NETWORK_TESTS=1 to run\n";
    return 77;
  }
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
