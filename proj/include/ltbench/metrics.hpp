#pragma once

// Evaluation metrics for learned representations and graphs.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ltbench/factors.hpp"
#include "ltbench/matrix.hpp"
#include "ltbench/readout.hpp"
#include "ltbench/views.hpp"

namespace lt {

/// Pearson correlation between every column of `a` (rows) and `b` (columns).
/// Throws ShapeError on mismatched row counts and ConstantColumn.
RowMatrix pearson_matrix(const RowMatrix& a, const RowMatrix& b);

struct MccResult {
  double score = 0.0;
  /// Truth column j is matched to learned column permutation[j].
  std::vector<std::size_t> permutation;
  RowMatrix abs_corr;
};

/// Mean absolute correlation under the best one-to-one matching of columns.
MccResult mcc(const RowMatrix& truth, const RowMatrix& learned);

/// Number of differing entries; a reversed edge counts twice. Both matrices
/// must be 0/1 with zero diagonals (NotBinary otherwise).
int shd(const RowMatrix& a, const RowMatrix& ahat);

/// Keeps the k off-diagonal entries of largest magnitude as edges. Ties go to
/// the entry that comes first in row-major order.
RowMatrix threshold_to_match(const RowMatrix& a_cont, std::size_t k);

/// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> x);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

struct BlockR2 {
  std::vector<std::size_t> content;
  std::vector<std::size_t> style;
  /// Mean over the two views of the held-out R^2 per factor.
  std::array<double, kNumFactors> r2{};
  std::array<std::array<double, kNumFactors>, 2> per_view{};
};

/// Reads every factor out of columns `selection` of each view's encoding.
BlockR2 block_r2(const RowMatrix& enc_a, const RowMatrix& enc_b, const RowMatrix& factors,
                 std::span<const std::size_t> selection, const ViewSpec& views, std::pair<std::size_t, std::size_t> pair,
                 const ReadoutConfig& cfg = {});

struct GroupedScores {
  /// Row labels: one per factor, then "NA" when unassigned columns exist.
  std::vector<std::string> groups;
  RowMatrix r2_raw;    // groups x 5
  RowMatrix r2;        // floored at 0
  RowMatrix spearman;  // |rank correlation| of prediction vs factor
  double r2_diag = 0.0, r2_sep = 0.0;
  double spearman_diag = 0.0, spearman_sep = 0.0;
};

/// `labels[c]` assigns latent column c to a factor name or "NA". Every factor
/// needs at least one column.
GroupedScores grouped_corr_matrices(const RowMatrix& latents, const std::vector<std::string>& labels,
                                    const RowMatrix& factors, const ReadoutConfig& cfg = {});

/// Mean of the diagonal and max of the off-diagonal of the leading d x d block.
std::pair<double, double> diag_sep(const RowMatrix& m);

nlohmann::json to_json(const MccResult& r);
nlohmann::json to_json(const BlockR2& r);
nlohmann::json to_json(const GroupedScores& r);
nlohmann::json matrix_to_json(const RowMatrix& m);

}  // namespace lt
