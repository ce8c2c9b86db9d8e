#pragma once

#include <vector>

#include "ltbench/matrix.hpp"

namespace lt {

/// Maximum-weight perfect matching on a square matrix (Hungarian method,
/// O(n^3)). Returns `col[i]`, the column matched to row i.
std::vector<std::size_t> max_weight_assignment(const RowMatrix& weight);

/// Exhaustive search over all permutations; for testing small instances.
std::vector<std::size_t> brute_force_assignment(const RowMatrix& weight);

}  // namespace lt
