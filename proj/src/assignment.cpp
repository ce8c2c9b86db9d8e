#include "ltbench/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "ltbench/errors.hpp"

namespace lt {

std::vector<std::size_t> max_weight_assignment(const RowMatrix& weight) {
  const auto n = static_cast<std::size_t>(weight.rows());
  if (weight.cols() != weight.rows()) throw ShapeError("assignment needs a square matrix");
  if (!weight.allFinite()) throw NonFinite("assignment weights");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials u (rows), v (columns); 1-based with column 0 as a sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  auto cost = [&](std::size_t i, std::size_t j) {
    return -weight(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  };
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col(n);
  for (std::size_t j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
  return col;
}

std::vector<std::size_t> brute_force_assignment(const RowMatrix& weight) {
  const auto n = static_cast<std::size_t>(weight.rows());
  if (weight.cols() != weight.rows()) throw ShapeError("assignment needs a square matrix");
  std::vector<std::size_t> perm(n), best;
  std::iota(perm.begin(), perm.end(), 0);
  double best_w = -std::numeric_limits<double>::infinity();
  do {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) w += weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    if (w > best_w) {
      best_w = w;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace lt
