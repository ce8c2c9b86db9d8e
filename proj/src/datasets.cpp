#include "ltbench/datasets.hpp"

#include <algorithm>
#include <exception>

#include "ltbench/errors.hpp"
#include "ltbench/kernels.hpp"
#include "ltbench/png_io.hpp"
#include "ltbench/rng.hpp"

namespace lt {

TunnelInputs SensorConfig::inputs(const FactorVector& device) const {
  TunnelInputs x;
  x.red = device[kRed];
  x.green = device[kGreen];
  x.blue = device[kBlue];
  x.theta1 = device[kTheta1];
  x.theta2 = device[kTheta2];
  x.diode_ir = diode_ir;
  x.diode_vis = diode_vis;
  x.t_ir = t_ir;
  x.t_vis = t_vis;
  x.v_c = v_c;
  x.v_angle_1 = v_angle_1;
  x.v_angle_2 = v_angle_2;
  return x;
}

nlohmann::json sensor_config_to_json(const SensorConfig& c) {
  return {{"diode_ir", c.diode_ir}, {"diode_vis", c.diode_vis}, {"t_ir", c.t_ir},          {"t_vis", c.t_vis},
          {"v_c", c.v_c},           {"v_angle_1", c.v_angle_1}, {"v_angle_2", c.v_angle_2}};
}

SensorConfig sensor_config_from_json(const nlohmann::json& j) {
  try {
    SensorConfig c;
    if (j.contains("diode_ir")) c.diode_ir = j.at("diode_ir").get<std::array<int, 3>>();
    if (j.contains("diode_vis")) c.diode_vis = j.at("diode_vis").get<std::array<int, 3>>();
    if (j.contains("t_ir")) c.t_ir = j.at("t_ir").get<std::array<int, 3>>();
    if (j.contains("t_vis")) c.t_vis = j.at("t_vis").get<std::array<int, 3>>();
    c.v_c = j.value("v_c", c.v_c);
    c.v_angle_1 = j.value("v_angle_1", c.v_angle_1);
    c.v_angle_2 = j.value("v_angle_2", c.v_angle_2);
    validate_inputs(c.inputs({0, 0, 0, 0, 0}));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw RangeError("sensor_config", std::string("malformed sensor config: ") + e.what());
  }
}

std::string to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::ccrl: return "ccrl";
    case DatasetKind::multiview: return "multiview";
    case DatasetKind::citris: return "citris";
    case DatasetKind::custom: return "custom";
  }
  return "custom";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  for (auto k : {DatasetKind::ccrl, DatasetKind::multiview, DatasetKind::citris, DatasetKind::custom})
    if (to_string(k) == s) return k;
  throw RangeError("kind", "unknown dataset kind '" + s + "'");
}

const DatasetSplit& Dataset::split(const std::string& name) const {
  for (const auto& s : splits)
    if (s.name == name) return s;
  throw RangeError("split", "no split named '" + name + "'");
}

std::size_t Dataset::total_rows() const {
  std::size_t n = 0;
  for (const auto& s : splits) n += s.rows.size();
  return n;
}

FactorVector device_factors(const TunnelInputs& x) noexcept { return {x.red, x.green, x.blue, x.theta1, x.theta2}; }

std::vector<DatasetRow> render_rows(const std::vector<FactorVector>& device, const GeneratorOptions& opts) {
  validate_params(opts.params);
  std::vector<DatasetRow> rows(device.size());
  std::vector<TunnelInputs> inputs(device.size());
  for (std::size_t i = 0; i < device.size(); ++i) {
    auto x = opts.config.inputs(device[i]);
    if (opts.quantize) x = quantize_inputs(x);
    inputs[i] = validate_inputs(x);
  }
  std::vector<SensorReadings> readings(device.size());
  kernels::parallel::simulate_batch(inputs, opts.params, SimulateOptions{opts.device_rounding}, readings);
  for (std::size_t i = 0; i < device.size(); ++i) {
    rows[i].inputs = inputs[i];
    rows[i].readings = readings[i];
  }
  return rows;
}

namespace {

Dataset base_dataset(DatasetKind kind, std::uint64_t seed, const GeneratorOptions& opts) {
  Dataset ds;
  ds.kind = kind;
  ds.seed = seed;
  ds.params = opts.params;
  ds.config = opts.config;
  ds.quantize = opts.quantize;
  ds.device_rounding = opts.device_rounding;
  ds.images = opts.images ? *opts.images : ImageSource::analytic(opts.params);
  return ds;
}

std::array<std::uint8_t, kNumFactors> one_hot(int target) {
  std::array<std::uint8_t, kNumFactors> h{};
  if (target >= 0) h[static_cast<std::size_t>(target)] = 1;
  return h;
}

/// Samples and renders every environment; rows of environment e are in
/// block e of the result.
std::vector<std::vector<DatasetRow>> scm_environment_rows(const ScmSpec& spec, const GeneratorOptions& opts) {
  std::vector<std::vector<DatasetRow>> out;
  for (const auto env : ccrl_environments()) {
    const auto sample = sample_scm(spec, env);
    std::vector<FactorVector> device(static_cast<std::size_t>(sample.device.rows()));
    for (std::size_t i = 0; i < device.size(); ++i)
      for (std::size_t k = 0; k < kNumFactors; ++k)
        device[i][k] = sample.device(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    auto rows = render_rows(device, opts);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t k = 0; k < kNumFactors; ++k)
        rows[i].latent[k] = sample.latent(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      rows[i].env = env.id();
      rows[i].intervention = one_hot(env.target);
    }
    out.push_back(std::move(rows));
  }
  return out;
}

std::array<std::size_t, 3> split_sizes(std::size_t n) {
  const std::size_t train = n * 8 / 10;
  const std::size_t val = n / 10;
  return {train, val, n - train - val};
}

const std::array<std::string, 3> kSplitNames = {"train", "val", "test"};

}  // namespace

Dataset build_ccrl_dataset(const ScmSpec& spec, const GeneratorOptions& opts) {
  validate_scm(spec);
  Dataset ds = base_dataset(DatasetKind::ccrl, spec.seed, opts);
  ds.spec = scm_to_json(spec);
  for (const auto& name : kSplitNames) ds.splits.push_back({name, {}});
  auto envs = scm_environment_rows(spec, opts);
  for (std::size_t e = 0; e < envs.size(); ++e) {
    std::vector<std::size_t> idx(envs[e].size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    CounterRng rng(spec.seed, streams::kSplit, e);
    shuffle(idx, rng);
    const auto sizes = split_sizes(idx.size());
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t i = 0; i < sizes[s]; ++i) ds.splits[s].rows.push_back(envs[e][idx[pos++]]);
  }
  return ds;
}

Dataset build_multiview_dataset(const ScmSpec& spec, const ViewSpec& views, const GeneratorOptions& opts) {
  validate_scm(spec);
  validate_views(views);
  Dataset ds = base_dataset(DatasetKind::multiview, spec.seed, opts);
  ds.spec = scm_to_json(spec);
  ds.views = views;
  std::vector<DatasetRow> pooled;
  for (auto& rows : scm_environment_rows(spec, opts))
    pooled.insert(pooled.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  std::vector<std::size_t> idx(pooled.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  CounterRng rng(spec.seed, streams::kSplit, ccrl_environments().size());
  shuffle(idx, rng);
  const auto sizes = split_sizes(idx.size());
  std::size_t pos = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    DatasetSplit split{kSplitNames[s], {}};
    split.rows.reserve(sizes[s]);
    for (std::size_t i = 0; i < sizes[s]; ++i) split.rows.push_back(pooled[idx[pos++]]);
    ds.splits.push_back(std::move(split));
  }
  return ds;
}

Dataset build_citris_dataset(const TemporalSpec& spec, const GeneratorOptions& opts) {
  validate_temporal(spec);
  Dataset ds = base_dataset(DatasetKind::citris, spec.seed, opts);
  ds.spec = temporal_to_json(spec);
  const auto trace = run_temporal(spec);
  auto rows = render_rows(trace.states, opts);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    rows[t].latent = trace.states[t];
    rows[t].env = "sequence";
    if (trace.interventions[t]) rows[t].intervention = one_hot(static_cast<int>(trace.interventions[t]->target));
  }
  std::size_t pos = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    DatasetSplit split{kSplitNames[s], {}};
    split.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(pos),
                      rows.begin() + static_cast<std::ptrdiff_t>(pos + spec.split[s]));
    pos += spec.split[s];
    ds.splits.push_back(std::move(split));
  }
  std::vector<FactorVector> iid(spec.eval_samples);
  for (std::size_t i = 0; i < iid.size(); ++i) iid[i] = sample_uniform_factors(spec.seed, i);
  DatasetSplit eval{"eval", render_rows(iid, opts)};
  for (std::size_t i = 0; i < iid.size(); ++i) {
    eval.rows[i].latent = iid[i];
    eval.rows[i].env = "iid";
  }
  ds.splits.push_back(std::move(eval));
  return ds;
}

Dataset build_uniform_dataset(std::size_t n, std::uint64_t seed, const GeneratorOptions& opts) {
  Dataset ds = base_dataset(DatasetKind::custom, seed, opts);
  ds.spec = {{"sampler", "iid_uniform"}, {"rows", n}, {"seed", seed}};
  std::vector<FactorVector> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = sample_uniform_factors(seed, i);
  DatasetSplit all{"all", render_rows(f, opts)};
  for (std::size_t i = 0; i < n; ++i) {
    all.rows[i].latent = f[i];
    all.rows[i].env = "iid";
  }
  ds.splits.push_back(std::move(all));
  return ds;
}

RowMatrix latent_matrix(const DatasetSplit& split) {
  RowMatrix m(static_cast<Eigen::Index>(split.rows.size()), static_cast<Eigen::Index>(kNumFactors));
  for (std::size_t i = 0; i < split.rows.size(); ++i)
    for (std::size_t k = 0; k < kNumFactors; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = split.rows[i].latent[k];
  return m;
}

RowMatrix device_matrix(const DatasetSplit& split) {
  RowMatrix m(static_cast<Eigen::Index>(split.rows.size()), static_cast<Eigen::Index>(kNumFactors));
  for (std::size_t i = 0; i < split.rows.size(); ++i) {
    const auto f = device_factors(split.rows[i].inputs);
    for (std::size_t k = 0; k < kNumFactors; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = f[k];
  }
  return m;
}

double output_value(const DatasetRow& row, const std::string& column) {
  const auto& r = row.readings;
  if (column == "current") return r.current;
  if (column == "angle_1") return r.angle_1;
  if (column == "angle_2") return r.angle_2;
  if (column.size() == 4 && column[3] >= '1' && column[3] <= '3') {
    const auto j = static_cast<std::size_t>(column[3] - '1');
    if (column.starts_with("ir_")) return r.ir[j];
  }
  if (column.size() == 5 && column.starts_with("vis_") && column[4] >= '1' && column[4] <= '3') {
    return r.vis[static_cast<std::size_t>(column[4] - '1')];
  }
  throw RangeError("column", "unknown output column '" + column + "'");
}

RowMatrix view_table(const DatasetSplit& split, const ViewDef& view) {
  RowMatrix m(static_cast<Eigen::Index>(split.rows.size()), static_cast<Eigen::Index>(view.outputs.size()));
  for (std::size_t c = 0; c < view.outputs.size(); ++c) {
    if (view.outputs[c] == "image") throw ShapeError("view '" + view.name + "' contains the image output");
    for (std::size_t i = 0; i < split.rows.size(); ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = output_value(split.rows[i], view.outputs[c]);
  }
  return m;
}

std::vector<ImageTensor> render_images(const Dataset& ds, const DatasetSplit& split, std::size_t begin,
                                       std::size_t end) {
  if (begin > end || end > split.rows.size()) throw RangeError("rows", "image range outside the split");
  if (begin < end && !split.rows[begin].image.empty()) {
    std::vector<ImageTensor> out(end - begin);
    const auto n = static_cast<std::ptrdiff_t>(end - begin);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        const auto& row = split.rows[begin + static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = read_png(ds.image_root / row.image);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
  }
  std::vector<TunnelInputs> xs;
  xs.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) xs.push_back(split.rows[i].inputs);
  return ds.images.render_batch(xs);
}

}  // namespace lt
