#include "ltbench/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <omp.h>

#include "ltbench/errors.hpp"

namespace lt::kernels {

namespace {

constexpr std::size_t kTile = 256;

std::size_t tile_count(std::size_t n) { return (n + kTile - 1) / kTile; }

void check_nn(ConstView a, ConstView b, View c) {
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) throw ShapeError("gemm_nn: incompatible shapes");
}

void check_tn(ConstView a, ConstView b, View c) {
  if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols) throw ShapeError("gemm_tn: incompatible shapes");
}

// c[j0:j1] (+)= sum_p a(p) * b[p][j0:j1], p ascending. `a_stride` lets the same
// routine walk a row of A (stride 1) or a column of A (stride = A.cols).
inline void row_tile(const double* a, std::size_t a_stride, std::size_t k, const double* b, std::size_t ldb,
                     std::size_t j0, std::size_t j1, double* c_row, bool accumulate) {
  double* __restrict c = c_row + j0;
  const std::size_t w = j1 - j0;
  if (!accumulate) std::fill(c, c + w, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[p * a_stride];
    if (av == 0.0) continue;  // ReLU activations are frequently exactly zero
    const double* __restrict bp = b + p * ldb + j0;
    for (std::size_t j = 0; j < w; ++j) c[j] += av * bp[j];
  }
}

inline void nn_task(ConstView a, ConstView b, View c, bool acc, std::size_t i, std::size_t t) {
  const std::size_t j0 = t * kTile;
  const std::size_t j1 = std::min(b.cols, j0 + kTile);
  row_tile(a.data + i * a.cols, 1, a.cols, b.data, b.cols, j0, j1, c.data + i * c.cols, acc);
}

inline void tn_task(ConstView a, ConstView b, View c, bool acc, std::size_t i, std::size_t t) {
  const std::size_t j0 = t * kTile;
  const std::size_t j1 = std::min(b.cols, j0 + kTile);
  row_tile(a.data + i, a.cols, a.rows, b.data, b.cols, j0, j1, c.data + i * c.cols, acc);
}

inline void cosine_row(double* row, std::size_t n, const double* phase, double scale) {
  for (std::size_t j = 0; j < n; ++j) row[j] = scale * std::cos(row[j] + phase[j]);
}

}  // namespace

namespace serial {

void gemm_nn(ConstView a, ConstView b, View c, bool accumulate) {
  check_nn(a, b, c);
  const std::size_t tiles = tile_count(b.cols);
  for (std::size_t t = 0; t < tiles; ++t)
    for (std::size_t i = 0; i < c.rows; ++i) nn_task(a, b, c, accumulate, i, t);
}

void gemm_tn(ConstView a, ConstView b, View c, bool accumulate) {
  check_tn(a, b, c);
  const std::size_t tiles = tile_count(b.cols);
  for (std::size_t t = 0; t < tiles; ++t)
    for (std::size_t i = 0; i < c.rows; ++i) tn_task(a, b, c, accumulate, i, t);
}

void cosine_features(View proj, std::span<const double> phase, double scale) {
  if (phase.size() != proj.cols) throw ShapeError("cosine_features: phase length");
  for (std::size_t i = 0; i < proj.rows; ++i) cosine_row(proj.data + i * proj.cols, proj.cols, phase.data(), scale);
}

void simulate_batch(std::span<const TunnelInputs> inputs, const SensorParams& p, const SimulateOptions& opts,
                    std::span<SensorReadings> out) {
  if (inputs.size() != out.size()) throw ShapeError("simulate_batch: output size");
  validate_params(p);
  for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = simulate_sensors_unchecked(inputs[i], p, opts);
}

}  // namespace serial

namespace parallel {

void gemm_nn(ConstView a, ConstView b, View c, bool accumulate) {
  check_nn(a, b, c);
  const auto tiles = static_cast<std::ptrdiff_t>(tile_count(b.cols));
  const auto rows = static_cast<std::ptrdiff_t>(c.rows);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t t = 0; t < tiles; ++t)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
      nn_task(a, b, c, accumulate, static_cast<std::size_t>(i), static_cast<std::size_t>(t));
}

void gemm_tn(ConstView a, ConstView b, View c, bool accumulate) {
  check_tn(a, b, c);
  const auto tiles = static_cast<std::ptrdiff_t>(tile_count(b.cols));
  const auto rows = static_cast<std::ptrdiff_t>(c.rows);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t t = 0; t < tiles; ++t)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
      tn_task(a, b, c, accumulate, static_cast<std::size_t>(i), static_cast<std::size_t>(t));
}

void cosine_features(View proj, std::span<const double> phase, double scale) {
  if (phase.size() != proj.cols) throw ShapeError("cosine_features: phase length");
  const auto rows = static_cast<std::ptrdiff_t>(proj.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    cosine_row(proj.data + static_cast<std::size_t>(i) * proj.cols, proj.cols, phase.data(), scale);
}

void simulate_batch(std::span<const TunnelInputs> inputs, const SensorParams& p, const SimulateOptions& opts,
                    std::span<SensorReadings> out) {
  if (inputs.size() != out.size()) throw ShapeError("simulate_batch: output size");
  validate_params(p);
  const auto n = static_cast<std::ptrdiff_t>(inputs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = simulate_sensors_unchecked(inputs[k], p, opts);
  }
}

}  // namespace parallel

int max_threads() { return omp_get_max_threads(); }

}  // namespace lt::kernels
