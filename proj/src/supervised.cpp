#include "ltbench/supervised.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltbench/errors.hpp"
#include "ltbench/readout.hpp"
#include "ltbench/rng.hpp"

namespace lt {

std::vector<std::size_t> supervised_dims() { return {ImageTensor::kSize, 64, 256, 256, 64, kNumFactors}; }

DenseNet make_supervised_net(std::uint64_t seed) {
  const auto dims = supervised_dims();
  const std::vector<Activation> acts = {Activation::leaky_relu, Activation::leaky_relu, Activation::leaky_relu,
                                        Activation::leaky_relu, Activation::identity};
  return make_dense_net(dims, acts, seed);
}

namespace {

RowMatrixF gather(const RowMatrixF& m, const std::vector<std::size_t>& idx) {
  RowMatrixF out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

SupervisedReport supervised_check(const RowMatrixF& images, const RowMatrix& factors,
                                  const std::vector<std::size_t>& train_rows,
                                  const std::vector<std::size_t>& test_rows, const SupervisedConfig& cfg) {
  if (images.cols() != static_cast<Eigen::Index>(ImageTensor::kSize)) throw ShapeError("images must be flattened 64x64x3");
  if (factors.cols() != static_cast<Eigen::Index>(kNumFactors)) throw ShapeError("factor table needs 5 columns");
  if (images.rows() != factors.rows()) throw ShapeError("images and factors must have equal row counts");
  if (train_rows.size() < 2 || test_rows.size() < 2) throw DegenerateSplit("train and test need at least two rows");
  std::vector<std::size_t> a = train_rows, b = test_rows;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) throw DegenerateSplit("train and test rows overlap");
  for (auto i : a)
    if (i >= static_cast<std::size_t>(images.rows())) throw ShapeError("row index out of range");
  for (auto i : b)
    if (i >= static_cast<std::size_t>(images.rows())) throw ShapeError("row index out of range");

  const RowMatrix ytr = take_rows(factors, train_rows);
  const RowMatrix yte = take_rows(factors, test_rows);
  const Eigen::RowVectorXd mean = ytr.colwise().mean();
  Eigen::RowVectorXd sd(ytr.cols());
  for (Eigen::Index c = 0; c < ytr.cols(); ++c) {
    sd(c) = std::sqrt((ytr.col(c).array() - mean(c)).square().mean());
    if (!(sd(c) > 0.0)) throw ConstantColumn(std::string(kFactorNames[static_cast<std::size_t>(c)]) + " is constant in the train split");
  }
  const RowMatrixF ztr = ((ytr.rowwise() - mean).array().rowwise() / sd.array()).matrix().cast<float>();

  TrainConfig tc;
  tc.lr = cfg.lr;
  tc.weight_decay = cfg.weight_decay;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.seed = cfg.seed;
  tc.on_epoch = cfg.on_epoch;
  auto trained = train_mse(make_supervised_net(cfg.seed), gather(images, train_rows), ztr, tc);

  RowMatrix pred = predict(trained.net, gather(images, test_rows));
  pred = (pred.array().rowwise() * sd.array()).matrix();
  pred.rowwise() += mean;

  SupervisedReport r;
  const auto scores = r2_score(yte, pred);
  std::copy(scores.begin(), scores.end(), r.r2.begin());
  r.r2_mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  r.train_rows = train_rows;
  r.test_rows = test_rows;
  r.loss_history = std::move(trained.loss_history);
  return r;
}

SupervisedReport supervised_check(const Dataset& ds, const SupervisedConfig& cfg) {
  struct Ref {
    const DatasetSplit* split;
    std::size_t row;
  };
  std::vector<Ref> pool;
  for (const auto& s : ds.splits)
    for (std::size_t i = 0; i < s.rows.size(); ++i) pool.push_back({&s, i});
  const std::size_t need = cfg.train + cfg.test;
  if (pool.size() < need) {
    throw DegenerateSplit("dataset has " + std::to_string(pool.size()) + " rows, the check needs " + std::to_string(need));
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(cfg.seed, streams::kSplit, 0x5E);
  shuffle(order, rng);
  order.resize(need);

  RowMatrixF images(static_cast<Eigen::Index>(need), static_cast<Eigen::Index>(ImageTensor::kSize));
  RowMatrix factors(static_cast<Eigen::Index>(need), static_cast<Eigen::Index>(kNumFactors));
  for (std::size_t i = 0; i < need; ++i) {
    const auto& ref = pool[order[i]];
    const auto img = render_images(ds, *ref.split, ref.row, ref.row + 1);
    images.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXf>(img[0].pixels().data(), static_cast<Eigen::Index>(ImageTensor::kSize));
    const auto f = device_factors(ref.split->rows[ref.row].inputs);
    for (std::size_t k = 0; k < kNumFactors; ++k) factors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = f[k];
  }
  std::vector<std::size_t> train(cfg.train), test(cfg.test);
  std::iota(train.begin(), train.end(), 0);
  std::iota(test.begin(), test.end(), cfg.train);
  return supervised_check(images, factors, train, test, cfg);
}

nlohmann::json to_json(const SupervisedReport& r) {
  nlohmann::json per;
  for (std::size_t k = 0; k < kNumFactors; ++k) per[std::string(kFactorNames[k])] = r.r2[k];
  return {{"r2_mean", r.r2_mean}, {"r2", per}, {"train_rows", r.train_rows.size()}, {"test_rows", r.test_rows.size()},
          {"loss_history", r.loss_history}};
}

}  // namespace lt
