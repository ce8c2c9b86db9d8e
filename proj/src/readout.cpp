#include "ltbench/readout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ltbench/dense.hpp"
#include "ltbench/errors.hpp"
#include "ltbench/kernels.hpp"
#include "ltbench/rng.hpp"

namespace lt {

SplitIndices split_indices(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw DegenerateSplit("train fraction must lie in (0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  CounterRng rng(seed, streams::kReadout, 0);
  shuffle(idx, rng);
  const auto cut = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  if (cut < 2 || n - cut < 2) {
    throw DegenerateSplit("split of " + std::to_string(n) + " rows leaves fewer than two rows on one side");
  }
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(cut), idx.end());
  return s;
}

RowMatrix take_rows(const RowMatrix& m, const std::vector<std::size_t>& idx) {
  RowMatrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<double> r2_score(const RowMatrix& truth, const RowMatrix& pred) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) throw ShapeError("r2_score: shapes differ");
  if (truth.rows() < 2) throw ShapeError("r2_score needs at least two rows");
  std::vector<double> out(static_cast<std::size_t>(truth.cols()));
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    const double mean = truth.col(c).mean();
    const double sst = (truth.col(c).array() - mean).square().sum();
    const double sse = (truth.col(c) - pred.col(c)).squaredNorm();
    if (!(sst > 0.0)) throw ConstantColumn("target column " + std::to_string(c) + " is constant");
    out[static_cast<std::size_t>(c)] = 1.0 - sse / sst;
  }
  return out;
}

double median_distance(const RowMatrix& x, std::size_t max_points) {
  const auto m = std::min<std::size_t>(static_cast<std::size_t>(x.rows()), max_points);
  std::vector<double> d;
  d.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      d.push_back((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm());
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

namespace {

struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const RowMatrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.scale.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double sd = std::sqrt((x.col(c).array() - s.mean(c)).square().mean());
      s.scale(c) = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  RowMatrix apply(const RowMatrix& x) const {
    return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
  }
};

struct RffMap {
  RowMatrix w;  // d x D
  std::vector<double> b;

  RowMatrix features(const RowMatrix& x) const {
    RowMatrix z(x.rows(), w.cols());
    kernels::parallel::gemm_nn(kernels::view(x), kernels::view(w), kernels::view(z));
    kernels::parallel::cosine_features(kernels::view(z), b, std::sqrt(2.0 / static_cast<double>(w.cols())));
    return z;
  }
};

RowMatrix fit_predict_rff(const RowMatrix& xtr, const RowMatrix& ytr, const RowMatrix& xte, const ReadoutConfig& cfg) {
  if (cfg.features == 0) throw RangeError("features", "must be positive");
  if (!(cfg.lambda > 0.0)) throw RangeError("lambda", "must be positive");
  const auto st = Standardizer::fit(xtr);
  const RowMatrix a = st.apply(xtr);
  const RowMatrix t = st.apply(xte);
  double sigma = median_distance(a);
  if (!(sigma > 0.0)) sigma = 1.0;

  RffMap map;
  const auto d = a.cols();
  const auto big_d = static_cast<Eigen::Index>(cfg.features);
  map.w.resize(d, big_d);
  map.b.resize(cfg.features);
  CounterRng rng(cfg.seed, streams::kReadout, 1);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < big_d; ++j) map.w(i, j) = rng.normal() / sigma;
  for (auto& v : map.b) v = rng.uniform(0.0, 2.0 * std::numbers::pi);

  RowMatrix z = map.features(a);
  const Eigen::RowVectorXd zmean = z.colwise().mean();
  const Eigen::RowVectorXd ymean = ytr.colwise().mean();
  z.rowwise() -= zmean;
  const RowMatrix yc = ytr.rowwise() - ymean;
  const double n = static_cast<double>(z.rows());

  RowMatrix gram(big_d, big_d);
  kernels::parallel::gemm_tn(kernels::view(z), kernels::view(z), kernels::view(gram));
  gram /= n;
  gram.diagonal().array() += cfg.lambda;
  RowMatrix rhs(big_d, yc.cols());
  kernels::parallel::gemm_tn(kernels::view(z), kernels::view(yc), kernels::view(rhs));
  rhs /= n;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw RankDeficient("ridge system is not positive definite");
  const RowMatrix coef = llt.solve(Eigen::MatrixXd(rhs));

  RowMatrix zt = map.features(t);
  zt.rowwise() -= zmean;
  RowMatrix pred = zt * coef;
  pred.rowwise() += ymean;
  return pred;
}

RowMatrix fit_predict_mlp(const RowMatrix& xtr, const RowMatrix& ytr, const RowMatrix& xte, const ReadoutConfig& cfg) {
  const auto sx = Standardizer::fit(xtr);
  const auto sy = Standardizer::fit(ytr);
  const RowMatrixF a = sx.apply(xtr).cast<float>();
  const RowMatrixF y = sy.apply(ytr).cast<float>();
  const std::size_t dims[] = {static_cast<std::size_t>(xtr.cols()), cfg.mlp_hidden, cfg.mlp_hidden,
                              static_cast<std::size_t>(ytr.cols())};
  const Activation acts[] = {Activation::leaky_relu, Activation::leaky_relu, Activation::identity};
  TrainConfig tc;
  tc.lr = cfg.mlp_lr;
  tc.epochs = cfg.mlp_epochs;
  tc.batch_size = cfg.mlp_batch;
  tc.seed = cfg.seed;
  auto res = train_mse(make_dense_net(dims, acts, cfg.seed), a, y, tc);
  RowMatrix pred = predict(res.net, sx.apply(xte).cast<float>());
  pred = (pred.array().rowwise() * sy.scale.array()).matrix();
  pred.rowwise() += sy.mean;
  return pred;
}

}  // namespace

RowMatrix fit_predict(const RowMatrix& x_train, const RowMatrix& y_train, const RowMatrix& x_test,
                      const ReadoutConfig& cfg) {
  if (x_train.rows() != y_train.rows()) throw ShapeError("readout: x and y row counts differ");
  if (x_train.cols() != x_test.cols()) throw ShapeError("readout: train and test widths differ");
  if (x_train.cols() == 0) throw ShapeError("readout: no input columns");
  if (!x_train.allFinite() || !y_train.allFinite() || !x_test.allFinite()) throw NonFinite("readout inputs");
  return cfg.kind == ReadoutKind::rff ? fit_predict_rff(x_train, y_train, x_test, cfg)
                                      : fit_predict_mlp(x_train, y_train, x_test, cfg);
}

HeldOut readout_predictions(const RowMatrix& x, const RowMatrix& y, const ReadoutConfig& cfg) {
  if (x.rows() != y.rows()) throw ShapeError("readout: x and y row counts differ");
  HeldOut h;
  h.split = split_indices(static_cast<std::size_t>(x.rows()), cfg.train_fraction, cfg.seed);
  h.truth = take_rows(y, h.split.test);
  h.pred = fit_predict(take_rows(x, h.split.train), take_rows(y, h.split.train), take_rows(x, h.split.test), cfg);
  return h;
}

std::vector<double> readout_r2(const RowMatrix& x, const RowMatrix& y, const ReadoutConfig& cfg) {
  const auto h = readout_predictions(x, y, cfg);
  return r2_score(h.truth, h.pred);
}

}  // namespace lt
