#include "ltbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ltbench/assignment.hpp"
#include "ltbench/errors.hpp"

namespace lt {

namespace {

void check_column(const double* data, std::size_t n, std::size_t stride, const std::string& what) {
  double lo = data[0], hi = data[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double v = data[i * stride];
    if (!std::isfinite(v)) throw NonFinite(what);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo == hi) throw ConstantColumn(what + " is constant");
}

RowMatrix centered_unit(const RowMatrix& m, const std::string& name) {
  RowMatrix c = m.rowwise() - m.colwise().mean();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    check_column(m.data() + j, static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                 name + " column " + std::to_string(j));
    c.col(j) /= c.col(j).norm();
  }
  return c;
}

}  // namespace

RowMatrix pearson_matrix(const RowMatrix& a, const RowMatrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("correlation needs equal row counts");
  if (a.rows() < 2) throw ShapeError("correlation needs at least two rows");
  const RowMatrix ua = centered_unit(a, "truth");
  const RowMatrix ub = centered_unit(b, "learned");
  RowMatrix c = ua.transpose() * ub;
  return c.cwiseMax(-1.0).cwiseMin(1.0);
}

MccResult mcc(const RowMatrix& truth, const RowMatrix& learned) {
  if (truth.cols() != learned.cols()) throw ShapeError("mcc needs equal column counts");
  if (truth.cols() == 0 || truth.cols() > 20) throw ShapeError("mcc supports 1 to 20 columns");
  MccResult r;
  r.abs_corr = pearson_matrix(truth, learned).cwiseAbs();
  r.permutation = max_weight_assignment(r.abs_corr);
  double s = 0.0;
  for (std::size_t j = 0; j < r.permutation.size(); ++j)
    s += r.abs_corr(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(r.permutation[j]));
  r.score = s / static_cast<double>(r.permutation.size());
  return r;
}

namespace {

void check_binary(const RowMatrix& m, const char* name) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (v != 0.0 && v != 1.0) throw NotBinary(std::string(name) + " has a non-binary entry");
      if (i == j && v != 0.0) throw NotBinary(std::string(name) + " has a self-loop");
    }
  }
}

}  // namespace

int shd(const RowMatrix& a, const RowMatrix& ahat) {
  if (a.rows() != a.cols() || ahat.rows() != ahat.cols() || a.rows() != ahat.rows()) {
    throw ShapeError("shd needs two square matrices of equal size");
  }
  check_binary(a, "A");
  check_binary(ahat, "Ahat");
  return static_cast<int>((a - ahat).cwiseAbs().sum());
}

RowMatrix threshold_to_match(const RowMatrix& a, std::size_t k) {
  if (a.rows() != a.cols()) throw ShapeError("threshold_to_match needs a square matrix");
  if (!a.allFinite()) throw NonFinite("adjacency estimate");
  const auto d = static_cast<std::size_t>(a.rows());
  if (k > d * d - d) throw RangeError("k", "exceeds the number of off-diagonal entries");
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j) cells.emplace_back(i, j);
  auto mag = [&](const auto& c) {
    return std::abs(a(static_cast<Eigen::Index>(c.first), static_cast<Eigen::Index>(c.second)));
  };
  // Stable sort keeps row-major order among equal magnitudes.
  std::stable_sort(cells.begin(), cells.end(), [&](const auto& x, const auto& y) { return mag(x) > mag(y); });
  RowMatrix out = RowMatrix::Zero(a.rows(), a.cols());
  for (std::size_t n = 0; n < k; ++n)
    out(static_cast<Eigen::Index>(cells[n].first), static_cast<Eigen::Index>(cells[n].second)) = 1.0;
  return out;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = rank;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("correlation needs equal lengths");
  if (x.size() < 2) throw ShapeError("correlation needs at least two values");
  check_column(x.data(), x.size(), 1, "x");
  check_column(y.data(), y.size(), 1, "y");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("correlation needs equal lengths");
  if (x.size() < 2) throw ShapeError("correlation needs at least two values");
  check_column(x.data(), x.size(), 1, "x");
  check_column(y.data(), y.size(), 1, "y");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

namespace {

RowMatrix select_columns(const RowMatrix& m, std::span<const std::size_t> cols) {
  RowMatrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] >= static_cast<std::size_t>(m.cols())) throw ShapeError("selected column out of range");
    out.col(static_cast<Eigen::Index>(c)) = m.col(static_cast<Eigen::Index>(cols[c]));
  }
  return out;
}

}  // namespace

BlockR2 block_r2(const RowMatrix& enc_a, const RowMatrix& enc_b, const RowMatrix& factors,
                 std::span<const std::size_t> selection, const ViewSpec& views, std::pair<std::size_t, std::size_t> pair,
                 const ReadoutConfig& cfg) {
  if (factors.cols() != static_cast<Eigen::Index>(kNumFactors)) throw ShapeError("factor table needs 5 columns");
  if (enc_a.rows() != factors.rows() || enc_b.rows() != factors.rows()) {
    throw ShapeError("encodings and factors must have equal row counts");
  }
  if (selection.empty()) throw ShapeError("empty content selection");
  const auto cs = views.content_style(pair.first, pair.second);
  BlockR2 r;
  r.content = cs.content;
  r.style = cs.style;
  const RowMatrix* enc[2] = {&enc_a, &enc_b};
  for (std::size_t v = 0; v < 2; ++v) {
    const auto scores = readout_r2(select_columns(*enc[v], selection), factors, cfg);
    std::copy(scores.begin(), scores.end(), r.per_view[v].begin());
  }
  for (std::size_t k = 0; k < kNumFactors; ++k) r.r2[k] = (r.per_view[0][k] + r.per_view[1][k]) / 2.0;
  return r;
}

std::pair<double, double> diag_sep(const RowMatrix& m) {
  const auto d = std::min(m.rows(), m.cols());
  if (d == 0) throw ShapeError("diag/sep of an empty matrix");
  double diag = 0.0, sep = d > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) diag += m(i, j);
      else sep = std::max(sep, m(i, j));
    }
  }
  return {diag / static_cast<double>(d), sep};
}

GroupedScores grouped_corr_matrices(const RowMatrix& latents, const std::vector<std::string>& labels,
                                    const RowMatrix& factors, const ReadoutConfig& cfg) {
  if (factors.cols() != static_cast<Eigen::Index>(kNumFactors)) throw ShapeError("factor table needs 5 columns");
  if (latents.rows() != factors.rows()) throw ShapeError("latents and factors must have equal row counts");
  if (labels.size() != static_cast<std::size_t>(latents.cols())) throw ShapeError("one group label per latent column");
  std::vector<std::vector<std::size_t>> members(kNumFactors + 1);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c] == "NA") {
      members[kNumFactors].push_back(c);
      continue;
    }
    auto it = std::find(kFactorNames.begin(), kFactorNames.end(), labels[c]);
    if (it == kFactorNames.end()) throw ShapeError("unknown group label '" + labels[c] + "'");
    members[static_cast<std::size_t>(it - kFactorNames.begin())].push_back(c);
  }
  GroupedScores g;
  for (std::size_t k = 0; k < kNumFactors; ++k) {
    if (members[k].empty()) throw ShapeError("no latent column assigned to " + std::string(kFactorNames[k]));
    g.groups.emplace_back(kFactorNames[k]);
  }
  if (!members[kNumFactors].empty()) g.groups.emplace_back("NA");
  const auto rows = static_cast<Eigen::Index>(g.groups.size());
  g.r2_raw.resize(rows, static_cast<Eigen::Index>(kNumFactors));
  g.spearman.resize(rows, static_cast<Eigen::Index>(kNumFactors));
  for (Eigen::Index gi = 0; gi < rows; ++gi) {
    const RowMatrix x = select_columns(latents, members[static_cast<std::size_t>(gi)]);
    bool all_constant = true;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (x.col(c).maxCoeff() != x.col(c).minCoeff()) all_constant = false;
    if (all_constant) throw ConstantColumn("group '" + g.groups[static_cast<std::size_t>(gi)] + "' is constant");
    const auto h = readout_predictions(x, factors, cfg);
    const auto r2 = r2_score(h.truth, h.pred);
    for (std::size_t k = 0; k < kNumFactors; ++k) {
      g.r2_raw(gi, static_cast<Eigen::Index>(k)) = r2[k];
      const Eigen::VectorXd p = h.pred.col(static_cast<Eigen::Index>(k));
      const Eigen::VectorXd t = h.truth.col(static_cast<Eigen::Index>(k));
      // A constant prediction carries no rank information.
      const bool flat = p.maxCoeff() == p.minCoeff();
      g.spearman(gi, static_cast<Eigen::Index>(k)) =
          flat ? 0.0 : std::abs(spearman({p.data(), static_cast<std::size_t>(p.size())},
                                          {t.data(), static_cast<std::size_t>(t.size())}));
    }
  }
  g.r2 = g.r2_raw.cwiseMax(0.0);
  std::tie(g.r2_diag, g.r2_sep) = diag_sep(g.r2);
  std::tie(g.spearman_diag, g.spearman_sep) = diag_sep(g.spearman);
  return g;
}

nlohmann::json matrix_to_json(const RowMatrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    out.push_back(row);
  }
  return out;
}

nlohmann::json to_json(const MccResult& r) {
  return {{"mcc", r.score}, {"permutation", r.permutation}, {"abs_corr", matrix_to_json(r.abs_corr)}};
}

nlohmann::json to_json(const BlockR2& r) {
  auto names = [](const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (auto k : idx) out.emplace_back(kFactorNames[k]);
    return out;
  };
  nlohmann::json scores, view_a, view_b;
  for (std::size_t k = 0; k < kNumFactors; ++k) {
    const std::string n(kFactorNames[k]);
    scores[n] = r.r2[k];
    view_a[n] = r.per_view[0][k];
    view_b[n] = r.per_view[1][k];
  }
  return {{"content", names(r.content)}, {"style", names(r.style)}, {"r2", scores}, {"per_view", {view_a, view_b}}};
}

nlohmann::json to_json(const GroupedScores& g) {
  return {{"groups", g.groups},
          {"factors", kFactorNames},
          {"r2_raw", matrix_to_json(g.r2_raw)},
          {"r2", matrix_to_json(g.r2)},
          {"spearman", matrix_to_json(g.spearman)},
          {"r2_diag", g.r2_diag},
          {"r2_sep", g.r2_sep},
          {"spearman_diag", g.spearman_diag},
          {"spearman_sep", g.spearman_sep}};
}

}  // namespace lt
