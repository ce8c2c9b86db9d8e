#pragma once

// Supervised sanity check: how well a small MLP recovers the factors from
// images when trained with ground-truth labels.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "json.hpp"
#include "ltbench/datasets.hpp"
#include "ltbench/dense.hpp"
#include "ltbench/factors.hpp"

namespace lt {

struct SupervisedConfig {
  std::size_t train = 5000;
  std::size_t test = 500;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  std::function<void(std::size_t, double)> on_epoch;
};

/// 12288 -> 64 -> 256 -> 256 -> 64 -> 5, LeakyReLU(0.01) between layers.
std::vector<std::size_t> supervised_dims();
DenseNet make_supervised_net(std::uint64_t seed);

struct SupervisedReport {
  double r2_mean = 0.0;
  std::array<double, kNumFactors> r2{};
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::vector<double> loss_history;
};

/// Trains on rows `train_rows` of (images, factors) and scores `test_rows`.
/// Targets are z-scored with train-split statistics. The index sets must be
/// disjoint (checked).
SupervisedReport supervised_check(const RowMatrixF& images, const RowMatrix& factors,
                                  const std::vector<std::size_t>& train_rows,
                                  const std::vector<std::size_t>& test_rows, const SupervisedConfig& cfg);

/// Draws cfg.train + cfg.test distinct rows from all splits of `ds` with a
/// seeded shuffle and regresses the device factors.
SupervisedReport supervised_check(const Dataset& ds, const SupervisedConfig& cfg);

nlohmann::json to_json(const SupervisedReport& r);

}  // namespace lt
