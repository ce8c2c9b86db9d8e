#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ltbench/assignment.hpp"
#include "ltbench/errors.hpp"
#include "ltbench/metrics.hpp"
#include "ltbench/readout.hpp"
#include "ltbench/rng.hpp"
#include "ltbench/scm.hpp"

using namespace lt;

namespace {

RowMatrix random_table(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  CounterRng rng(seed);
  RowMatrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

RowMatrix graph(std::initializer_list<std::pair<int, int>> edges, int d = 3) {
  RowMatrix a = RowMatrix::Zero(d, d);
  for (auto [i, j] : edges) a(i, j) = 1.0;
  return a;
}

/// 6000 SCM latent rows, 1000 from each environment.
RowMatrix scm_factors() {
  auto spec = ScmSpec::with_graph(ScmSpec::placeholder_graph(), 0);
  spec.samples_per_env = 1000;
  RowMatrix f(6000, 5);
  for (const auto& env : ccrl_environments()) {
    f.middleRows(static_cast<Eigen::Index>(env.index()) * 1000, 1000) = sample_scm(spec, env).latent;
  }
  return f;
}

}  // namespace

TEST_CASE("MCC examples") {
  const auto t = random_table(500, 4, 1);
  const auto same = mcc(t, t);
  CHECK(same.score == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(same.permutation == std::vector<std::size_t>{0, 1, 2, 3});

  const std::vector<int> perm = {2, 0, 3, 1};
  RowMatrix learned(500, 4);
  for (int j = 0; j < 4; ++j) learned.col(perm[j]) = (j % 2 ? -1.0 : 1.0) * t.col(j);
  const auto r = mcc(t, learned);
  CHECK(r.score == doctest::Approx(1.0).epsilon(1e-14));
  for (int j = 0; j < 4; ++j) CHECK(r.permutation[j] == static_cast<std::size_t>(perm[j]));
}

TEST_CASE("MCC assignment equals exhaustive search at d = 4") {
  const auto a = random_table(200, 4, 0);
  const auto b = random_table(200, 4, 100);
  const auto r = mcc(a, b);
  CHECK(r.permutation == brute_force_assignment(r.abs_corr));
  double best = 0.0;
  std::vector<std::size_t> p = {0, 1, 2, 3};
  do {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += r.abs_corr(j, static_cast<Eigen::Index>(p[j]));
    best = std::max(best, s / 4.0);
  } while (std::next_permutation(p.begin(), p.end()));
  CHECK(r.score == doctest::Approx(best).epsilon(1e-14));
}

TEST_CASE("property: Hungarian equals brute force for d <= 6") {
  for (int inst = 0; inst < 100; ++inst) {
    const int d = 1 + inst % 6;
    CounterRng rng(inst);
    RowMatrix w(d, d);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform();
    REQUIRE(max_weight_assignment(w) == brute_force_assignment(w));
  }
  RowMatrix neg(2, 2);
  neg << -5, -1, -1, -5;
  CHECK(max_weight_assignment(neg) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("property: MCC invariances") {
  const auto t = random_table(300, 5, 2);
  const RowMatrix l = random_table(300, 5, 3) + 0.5 * t;
  const double base = mcc(t, l).score;
  RowMatrix scaled = l;
  for (int j = 0; j < 5; ++j) scaled.col(j) = (j % 2 ? -3.0 : 0.25) * l.col(j).array() + 7.0 * j;
  CHECK(mcc(t, scaled).score == doctest::Approx(base).epsilon(1e-12));
  CHECK(mcc(-t, l).score == doctest::Approx(base).epsilon(1e-12));

  std::vector<Eigen::Index> rows(300);
  std::iota(rows.begin(), rows.end(), 0);
  std::reverse(rows.begin(), rows.end());
  std::rotate(rows.begin(), rows.begin() + 37, rows.end());
  RowMatrix tp(300, 5), lp(300, 5);
  for (Eigen::Index i = 0; i < 300; ++i) {
    tp.row(i) = t.row(rows[i]);
    lp.row(i) = l.row(rows[i]);
  }
  CHECK(mcc(tp, lp).score == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("MCC errors") {
  CHECK_THROWS_AS(mcc(random_table(10, 3, 1), random_table(11, 3, 2)), ShapeError);
  CHECK_THROWS_AS(mcc(random_table(10, 3, 1), random_table(10, 4, 2)), ShapeError);
  CHECK_THROWS_AS(mcc(random_table(30, 21, 1), random_table(30, 21, 2)), ShapeError);
  auto c = random_table(10, 3, 1);
  c.col(1).setConstant(2.0);
  CHECK_THROWS_AS(mcc(c, random_table(10, 3, 2)), ConstantColumn);
  const auto p = pearson_matrix(random_table(40, 3, 5), random_table(40, 2, 6));
  CHECK(p.rows() == 3);
  CHECK(p.cols() == 2);
  CHECK(p.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("SHD fixtures") {
  const auto a = graph({{0, 1}, {1, 2}});
  CHECK(shd(a, a) == 0);
  CHECK(shd(a, graph({{1, 0}, {1, 2}})) == 2);
  CHECK(shd(graph({{0, 1}, {1, 2}, {0, 2}}), RowMatrix::Zero(3, 3)) == 3);
  CHECK(shd(a, graph({{0, 1}, {1, 2}, {2, 0}})) == 1);
  RowMatrix weighted = a;
  weighted(0, 1) = 0.5;
  CHECK_THROWS_AS(shd(weighted, a), NotBinary);
  CHECK_THROWS_AS(shd(a, graph({{1, 1}})), NotBinary);
  CHECK_THROWS_AS(shd(a, RowMatrix::Zero(4, 4)), ShapeError);
}

TEST_CASE("property: SHD symmetry and triangle inequality") {
  auto random_graph = [](CounterRng& rng) {
    RowMatrix g = RowMatrix::Zero(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j && rng.uniform() < 0.3) g(i, j) = 1;
    return g;
  };
  CounterRng rng(42);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_graph(rng), b = random_graph(rng), c = random_graph(rng);
    REQUIRE(shd(a, b) == shd(b, a));
    REQUIRE(shd(a, c) <= shd(a, b) + shd(b, c));
  }
}

TEST_CASE("threshold_to_match") {
  RowMatrix w(3, 3);
  w << 9, 0.9, 0.1,
       0.05, 0, -0.7,
       0.3, 0.2, 5;
  CHECK(threshold_to_match(w, 2) == graph({{0, 1}, {1, 2}}));
  CHECK(threshold_to_match(w, 0) == RowMatrix::Zero(3, 3));
  CHECK_THROWS_AS(threshold_to_match(w, 7), RangeError);

  RowMatrix tie(3, 3);
  tie << 0, 0.9, 0,
         0, 0, 0.5,
         -0.5, 0, 0;
  CHECK(threshold_to_match(tie, 2) == graph({{0, 1}, {1, 2}}));
  CHECK(threshold_to_match(tie, 3) == graph({{0, 1}, {1, 2}, {2, 0}}));
}

TEST_CASE("Spearman") {
  const std::vector<double> x = {1, 2, 2, 3, 5};
  const std::vector<double> y = {2, 1, 4, 3, 5};
  CHECK(average_ranks(x) == std::vector<double>{1, 2.5, 2.5, 4, 5});
  // Ranks (1, 2.5, 2.5, 4, 5) against (2, 1, 4, 3, 5): 6.5 / sqrt(9.5 * 10).
  CHECK(spearman(x, y) == doctest::Approx(0.66688592885535025).epsilon(1e-14));
  CHECK(spearman(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<double> z = {-0.5, 0.1, 0.7, 2.0, 3.5};
  std::vector<double> neg_cube(z.size());
  std::transform(z.begin(), z.end(), neg_cube.begin(), [](double v) { return -v * v * v; });
  CHECK(spearman(z, neg_cube) == doctest::Approx(-1.0).epsilon(1e-15));
  const std::vector<double> flat = {1, 1, 1};
  CHECK_THROWS_AS(spearman(flat, std::vector<double>{1, 2, 3}), ConstantColumn);
  CHECK_THROWS(spearman(std::vector<double>{1}, std::vector<double>{2}));
}

TEST_CASE("property: Spearman invariant under monotone transforms") {
  CounterRng rng(7);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(40), b(40);
    for (int i = 0; i < 40; ++i) {
      a[i] = rng.uniform(-2, 2);
      b[i] = a[i] + rng.normal();
    }
    const double base = spearman(a, b);
    std::vector<double> ea(40), cb(40);
    for (int i = 0; i < 40; ++i) {
      ea[i] = std::exp(a[i]);
      cb[i] = std::atan(b[i]) * 3 - 1;
    }
    REQUIRE(spearman(ea, cb) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("readout basics") {
  const auto s = split_indices(100, 0.8, 3);
  CHECK(s.train.size() == 80);
  CHECK(s.test.size() == 20);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 100; ++i) CHECK(all[i] == i);
  CHECK_THROWS_AS(split_indices(3, 0.8, 0), DegenerateSplit);

  RowMatrix t(4, 1), p(4, 1);
  t << 1, 2, 3, 4;
  p << 1, 2, 3, 5;
  CHECK(r2_score(t, p)[0] == doctest::Approx(1.0 - 1.0 / 5.0).epsilon(1e-15));
  RowMatrix flat = RowMatrix::Ones(4, 1);
  CHECK_THROWS_AS(r2_score(flat, p), ConstantColumn);

  RowMatrix pts(3, 1);
  pts << 0, 1, 3;
  CHECK(median_distance(pts) == 2.0);
}

TEST_CASE("block R2: identity encodings") {
  const auto f = scm_factors();
  const auto views = ViewSpec::standard();
  const std::vector<std::size_t> sel = {0, 1, 2, 3, 4};
  const auto r = block_r2(f, f, f, sel, views, {0, 1});
  for (double v : r.r2) CHECK(v > 0.99);
  CHECK(r.content == std::vector<std::size_t>{0, 1, 2});
  CHECK(r.style == std::vector<std::size_t>{3, 4});
}

TEST_CASE("block R2: independent noise") {
  const auto f = scm_factors();
  const auto ea = random_table(6000, 5, 77), eb = random_table(6000, 5, 78);
  const std::vector<std::size_t> sel = {0, 1, 2, 3, 4};
  const auto r = block_r2(ea, eb, f, sel, ViewSpec::standard(), {0, 1});
  for (double v : r.r2) CHECK(v < 0.05);
}

TEST_CASE("block R2: nonlinear invertible map of the content block") {
  const auto f = scm_factors();
  const auto views = ViewSpec::standard();
  const auto cs = views.content_style(0, 1);
  RowMatrix content(f.rows(), 3);
  for (int j = 0; j < 3; ++j) content.col(j) = f.col(static_cast<Eigen::Index>(cs.content[j]));

  auto encode = [&](double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d rot;
    rot << c, -s, 0, s, c, 0, 0, 0, 1;
    const Eigen::Matrix3d tilt = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 1, 0).normalized()).toRotationMatrix();
    RowMatrix cubed = content.array().cube().matrix();
    return RowMatrix(cubed * (tilt * rot).transpose());
  };
  const auto ea = encode(0.3), eb = encode(1.1);
  const std::vector<std::size_t> sel = {0, 1, 2};
  const ReadoutConfig cfg;
  const auto r = block_r2(ea, eb, f, sel, views, {0, 1}, cfg);
  for (auto k : cs.content) CHECK(r.r2[k] > 0.95);

  // Oracle: the same readout fitted directly on the true content factors.
  RowMatrix style(f.rows(), 2);
  for (int j = 0; j < 2; ++j) style.col(j) = f.col(static_cast<Eigen::Index>(cs.style[j]));
  const auto oracle = readout_r2(content, style, cfg);
  for (int j = 0; j < 2; ++j) CHECK(std::abs(r.r2[cs.style[j]] - oracle[j]) < 0.1);

  const auto again = block_r2(ea, eb, f, sel, views, {0, 1}, cfg);
  CHECK(again.r2 == r.r2);
  CHECK(again.per_view == r.per_view);
}

TEST_CASE("block R2 errors") {
  const auto f = scm_factors();
  const std::vector<std::size_t> bad = {7};
  CHECK_THROWS_AS(block_r2(f, f, f, bad, ViewSpec::standard(), {0, 1}), ShapeError);
  CHECK_THROWS_AS(block_r2(f.topRows(100), f, f, std::vector<std::size_t>{0}, ViewSpec::standard(), {0, 1}),
                  ShapeError);
}

TEST_CASE("grouped correlation matrices") {
  const auto f = scm_factors();
  const std::vector<std::string> names = {"R", "G", "B", "theta1", "theta2"};
  const auto g = grouped_corr_matrices(f, names, f);
  CHECK(g.r2_diag > 0.99);
  CHECK(g.spearman_diag > 0.99);

  // Oracle for sep: every factor read out of every other factor directly.
  double sep = 0.0;
  for (int i = 0; i < 5; ++i) {
    const auto r = readout_r2(f.col(i), f, ReadoutConfig{});
    for (int j = 0; j < 5; ++j)
      if (i != j) sep = std::max(sep, std::max(0.0, r[j]));
  }
  CHECK(g.r2_sep == doctest::Approx(sep).epsilon(1e-9));

  const std::vector<std::string> wrong = {"G", "B", "theta1", "theta2", "R"};
  const auto w = grouped_corr_matrices(f, wrong, f);
  CHECK(w.r2_diag < w.r2_sep);

  RowMatrix with_na(f.rows(), 6);
  with_na << f, random_table(f.rows(), 1, 9);
  auto labels = names;
  labels.push_back("NA");
  const auto na = grouped_corr_matrices(with_na, labels, f);
  CHECK(na.groups.back() == "NA");
  CHECK(na.r2.rows() == 6);
  CHECK(na.r2_diag == doctest::Approx(g.r2_diag).epsilon(1e-12));

  RowMatrix constant = f;
  constant.col(2).setConstant(1.0);
  CHECK_THROWS_AS(grouped_corr_matrices(constant, names, f), ConstantColumn);
  const std::vector<std::string> missing = {"R", "R", "B", "theta1", "theta2"};
  CHECK_THROWS_AS(grouped_corr_matrices(f, missing, f), ShapeError);
}

TEST_CASE("MLP readout alternative") {
  const auto f = scm_factors();
  ReadoutConfig cfg;
  cfg.kind = ReadoutKind::mlp;
  cfg.mlp_epochs = 20;
  const auto r = readout_r2(f.leftCols(3), f.leftCols(3), cfg);
  for (double v : r) CHECK(v > 0.95);
}

TEST_CASE("diag_sep and JSON") {
  RowMatrix m(3, 3);
  m << 1, 0.2, 0.1, 0.3, 0.8, 0.0, 0.0, 0.4, 0.6;
  const auto [d, s] = diag_sep(m);
  CHECK(d == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s == 0.4);
  const auto j = matrix_to_json(m);
  CHECK(j.size() == 3);
  CHECK(j[1][0] == 0.3);
}
