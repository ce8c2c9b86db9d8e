#pragma once

// Data-parallel inner loops. Every kernel exists twice: a serial reference in
// `serial::` and an OpenMP version in `parallel::`. Both call the same per-row
// routine, and the parallel versions only split work over output rows and
// column tiles, never over a reduction. Their results are therefore
// bit-identical for any thread count.

#include <cstddef>
#include <span>

#include "ltbench/matrix.hpp"
#include "ltbench/sensors.hpp"
#include "ltbench/tunnel.hpp"

namespace lt::kernels {

/// Contiguous row-major view.
struct ConstView {
  const double* data;
  std::size_t rows;
  std::size_t cols;
};

struct View {
  double* data;
  std::size_t rows;
  std::size_t cols;

  operator ConstView() const noexcept { return {data, rows, cols}; }
};

inline ConstView view(const RowMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
}
inline View view(RowMatrix& m) {
  return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
}

namespace serial {

/// C = A B (or C += A B when `accumulate`). A is m x k, B is k x n.
void gemm_nn(ConstView a, ConstView b, View c, bool accumulate = false);

/// C = A^T B (or C += A^T B). A is k x m, B is k x n.
void gemm_tn(ConstView a, ConstView b, View c, bool accumulate = false);

/// out[i] = scale * cos(proj[i] + phase) elementwise per column.
void cosine_features(View proj, std::span<const double> phase, double scale);

void simulate_batch(std::span<const TunnelInputs> inputs, const SensorParams& p, const SimulateOptions& opts,
                    std::span<SensorReadings> out);

}  // namespace serial

namespace parallel {

void gemm_nn(ConstView a, ConstView b, View c, bool accumulate = false);
void gemm_tn(ConstView a, ConstView b, View c, bool accumulate = false);
void cosine_features(View proj, std::span<const double> phase, double scale);
void simulate_batch(std::span<const TunnelInputs> inputs, const SensorParams& p, const SimulateOptions& opts,
                    std::span<SensorReadings> out);

}  // namespace parallel

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace lt::kernels
