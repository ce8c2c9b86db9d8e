#pragma once

// Nonlinear regression readouts used to score representations: ridge
// regression on random Fourier features (default) or a small MLP.

#include <cstdint>
#include <vector>

#include "ltbench/matrix.hpp"

namespace lt {

enum class ReadoutKind { rff, mlp };

struct ReadoutConfig {
  ReadoutKind kind = ReadoutKind::rff;
  std::size_t features = 512;
  double lambda = 1e-3;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  /// Settings of the MLP alternative.
  std::size_t mlp_hidden = 64;
  std::size_t mlp_epochs = 60;
  std::size_t mlp_batch = 64;
  double mlp_lr = 1e-3;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1 cut at round(n * train_fraction). Throws
/// DegenerateSplit when either side has fewer than two rows.
SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

RowMatrix take_rows(const RowMatrix& m, const std::vector<std::size_t>& idx);

/// 1 - SSE / SST per column; may be negative. Throws ConstantColumn when a
/// column of `truth` has zero variance.
std::vector<double> r2_score(const RowMatrix& truth, const RowMatrix& pred);

/// Fits the readout on (x_train, y_train) and predicts `x_test`. All outputs
/// share one feature map.
RowMatrix fit_predict(const RowMatrix& x_train, const RowMatrix& y_train, const RowMatrix& x_test,
                      const ReadoutConfig& cfg);

/// Held-out R^2 per column of `y` for predicting it from `x`.
std::vector<double> readout_r2(const RowMatrix& x, const RowMatrix& y, const ReadoutConfig& cfg);

/// Held-out predictions with the split used, for callers that need more than R^2.
struct HeldOut {
  SplitIndices split;
  RowMatrix truth;
  RowMatrix pred;
};
HeldOut readout_predictions(const RowMatrix& x, const RowMatrix& y, const ReadoutConfig& cfg);

/// Median of pairwise Euclidean distances among the first `max_points` rows.
double median_distance(const RowMatrix& x, std::size_t max_points = 512);

}  // namespace lt
