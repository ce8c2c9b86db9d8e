#include "ltbench/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "ltbench/checksum.hpp"
#include "ltbench/errors.hpp"
#include "ltbench/png_io.hpp"
#include "ltbench/table_io.hpp"

namespace fs = std::filesystem;

namespace lt {

const std::vector<std::string>& data_columns() {
  static const std::vector<std::string> cols = {
      "red",         "green",       "blue",        "pol_1",   "pol_2",   "ir_1",    "ir_2",    "ir_3",
      "vis_1",       "vis_2",       "vis_3",       "current", "angle_1", "angle_2", "diode_ir_1",
      "diode_ir_2",  "diode_ir_3",  "diode_vis_1", "diode_vis_2", "diode_vis_3", "t_ir_1", "t_ir_2",
      "t_ir_3",      "t_vis_1",     "t_vis_2",     "t_vis_3", "v_c",     "v_angle_1", "v_angle_2"};
  return cols;
}

std::vector<std::string> dataset_columns(bool with_images) {
  auto cols = data_columns();
  cols.emplace_back("env");
  for (auto n : kFactorNames) cols.push_back("int_" + std::string(n));
  for (auto n : kFactorNames) cols.push_back("z_" + std::string(n));
  if (with_images) cols.emplace_back("image");
  return cols;
}

namespace {

std::string image_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "images/%06zu.png", index);
  return buf;
}

std::vector<std::string> row_fields(const DatasetRow& r) {
  const auto& x = r.inputs;
  const auto& s = r.readings;
  std::vector<std::string> f;
  f.reserve(48);
  auto num = [&](double v) { f.push_back(format_double(v)); };
  auto num3 = [&](const auto& a) {
    for (auto v : a) num(static_cast<double>(v));
  };
  num(x.red);
  num(x.green);
  num(x.blue);
  num(x.theta1);
  num(x.theta2);
  num3(s.ir);
  num3(s.vis);
  num(s.current);
  num(s.angle_1);
  num(s.angle_2);
  num3(x.diode_ir);
  num3(x.diode_vis);
  num3(x.t_ir);
  num3(x.t_vis);
  num(x.v_c);
  num(x.v_angle_1);
  num(x.v_angle_2);
  f.push_back(r.env);
  for (auto b : r.intervention) f.push_back(b ? "1" : "0");
  for (auto v : r.latent) num(v);
  return f;
}

int as_int(double v, const std::string& col) {
  if (v != static_cast<double>(static_cast<int>(v))) throw FormatError("column " + col + " must hold integers");
  return static_cast<int>(v);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

const std::vector<std::string> kSplitOrder = {"train", "val", "test", "eval", "all"};

}  // namespace

void write_split_csv(const fs::path& path, const DatasetSplit& split, bool with_images) {
  CsvTable t;
  t.header = dataset_columns(with_images);
  t.rows.reserve(split.rows.size());
  for (const auto& r : split.rows) {
    auto f = row_fields(r);
    if (with_images) f.push_back(r.image);
    t.rows.push_back(std::move(f));
  }
  write_csv(path, t);
}

DatasetSplit read_split_csv(const fs::path& path, const std::string& name) {
  const auto t = read_csv(path);
  t.require(data_columns());
  std::vector<std::size_t> idx;
  for (const auto& c : data_columns()) idx.push_back(static_cast<std::size_t>(t.column(c)));
  const long env_col = t.column("env");
  const long image_col = t.column("image");
  std::array<long, kNumFactors> int_cols{}, z_cols{};
  for (std::size_t k = 0; k < kNumFactors; ++k) {
    int_cols[k] = t.column("int_" + std::string(kFactorNames[k]));
    z_cols[k] = t.column("z_" + std::string(kFactorNames[k]));
  }
  DatasetSplit split{name, {}};
  split.rows.resize(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto v = [&](std::size_t c) { return t.number(r, idx[c]); };
    auto iv = [&](std::size_t c) { return as_int(v(c), data_columns()[c]); };
    DatasetRow& row = split.rows[r];
    auto& x = row.inputs;
    auto& s = row.readings;
    x.red = v(0);
    x.green = v(1);
    x.blue = v(2);
    x.theta1 = v(3);
    x.theta2 = v(4);
    for (std::size_t j = 0; j < 3; ++j) {
      s.ir[j] = v(5 + j);
      s.vis[j] = v(8 + j);
      x.diode_ir[j] = iv(14 + j);
      x.diode_vis[j] = iv(17 + j);
      x.t_ir[j] = iv(20 + j);
      x.t_vis[j] = iv(23 + j);
    }
    s.current = v(11);
    s.angle_1 = v(12);
    s.angle_2 = v(13);
    x.v_c = v(26);
    x.v_angle_1 = v(27);
    x.v_angle_2 = v(28);
    if (env_col >= 0) row.env = t.rows[r][static_cast<std::size_t>(env_col)];
    if (image_col >= 0) row.image = t.rows[r][static_cast<std::size_t>(image_col)];
    const auto device = device_factors(x);
    for (std::size_t k = 0; k < kNumFactors; ++k) {
      if (int_cols[k] >= 0) {
        const double b = t.number(r, static_cast<std::size_t>(int_cols[k]));
        if (b != 0.0 && b != 1.0) throw FormatError("intervention columns must be 0 or 1");
        row.intervention[k] = static_cast<std::uint8_t>(b);
      }
      row.latent[k] = z_cols[k] >= 0 ? t.number(r, static_cast<std::size_t>(z_cols[k])) : device[k];
    }
  }
  return split;
}

nlohmann::json build_manifest(const Dataset& ds, const fs::path& dir) {
  nlohmann::json m;
  m["name"] = to_string(ds.kind) + "-seed" + std::to_string(ds.seed);
  m["format_version"] = 1;
  m["kind"] = to_string(ds.kind);
  m["seed"] = ds.seed;
  m["params"] = params_to_json(ds.params);
  m["sensor_config"] = sensor_config_to_json(ds.config);
  m["quantize"] = ds.quantize;
  m["device_rounding"] = ds.device_rounding;
  m["spec"] = ds.spec;
  m["image_source"] = ds.images.describe();
  if (ds.views) {
    m["views"] = views_to_json(*ds.views);
    nlohmann::json blocks = nlohmann::json::array();
    for (auto [a, b] : ds.views->all_pairs()) {
      const auto cs = ds.views->content_style(a, b);
      std::vector<std::string> content, style;
      for (auto k : cs.content) content.emplace_back(kFactorNames[k]);
      for (auto k : cs.style) style.emplace_back(kFactorNames[k]);
      blocks.push_back({{"pair", {ds.views->views[a].name, ds.views->views[b].name}},
                        {"content", content},
                        {"style", style}});
    }
    m["content_blocks"] = blocks;
  }
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : ds.splits) {
    std::map<std::string, std::size_t> per_env;
    for (const auto& r : s.rows) ++per_env[r.env];
    splits.push_back({{"name", s.name}, {"rows", s.rows.size()}, {"environments", per_env}});
  }
  m["splits"] = splits;
  nlohmann::json sums = nlohmann::json::object();
  for (const auto& s : ds.splits) {
    const auto file = s.name + ".csv";
    sums[file] = sha256_file(dir / file);
  }
  if (fs::exists(dir / "images")) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir / "images")) names.push_back("images/" + e.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const auto& n : names) sums[n] = sha256_file(dir / n);
  }
  m["checksums"] = sums;
  return m;
}

void write_dataset(const Dataset& ds, const fs::path& dir, const WriteOptions& opts) {
  fs::create_directories(dir);
  if (opts.images && !ds.image_root.empty() && fs::exists(ds.image_root) && fs::equivalent(ds.image_root, dir)) {
    throw FormatError("cannot rewrite a dataset's images in place");
  }
  if (opts.images) {
    fs::remove_all(dir / "images");
    fs::create_directories(dir / "images");
  }
  std::size_t index = 0;
  for (const auto& split : ds.splits) {
    DatasetSplit out{split.name, split.rows};
    if (opts.images) {
      constexpr std::size_t kChunk = 1024;
      for (std::size_t begin = 0; begin < out.rows.size(); begin += kChunk) {
        const auto end = std::min(out.rows.size(), begin + kChunk);
        const auto imgs = render_images(ds, split, begin, end);
        for (std::size_t i = begin; i < end; ++i) {
          out.rows[i].image = image_name(index++);
          write_png(dir / out.rows[i].image, imgs[i - begin]);
        }
      }
    }
    write_split_csv(dir / (split.name + ".csv"), out, opts.images);
  }
  write_json(dir / "manifest.json", build_manifest(ds, dir));
}

Dataset read_dataset(const fs::path& dir, const ReadOptions& opts) {
  if (!fs::is_directory(dir)) throw NotFound("dataset directory " + dir.string());
  Dataset ds;
  ds.image_root = dir;
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    ds.params = example_params();
    ds.images = ImageSource::analytic(ds.params);
    for (const auto& name : kSplitOrder)
      if (fs::exists(dir / (name + ".csv"))) ds.splits.push_back(read_split_csv(dir / (name + ".csv"), name));
    if (ds.splits.empty()) throw NotFound("no split CSV files in " + dir.string());
    return ds;
  }
  nlohmann::json m;
  try {
    std::ifstream in(manifest_path);
    m = nlohmann::json::parse(in);
    ds.kind = dataset_kind_from_string(m.at("kind").get<std::string>());
    ds.seed = m.at("seed").get<std::uint64_t>();
    ds.params = params_from_json(m.at("params"));
    ds.config = sensor_config_from_json(m.at("sensor_config"));
    ds.quantize = m.value("quantize", false);
    ds.device_rounding = m.value("device_rounding", false);
    ds.spec = m.value("spec", nlohmann::json::object());
    if (m.contains("views")) ds.views = views_from_json(m.at("views"));
    const auto& src = m.at("image_source");
    ds.images = ImageSource::analytic(ds.params, AnalyticImageOptions{src.value("frame_rings", true)});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest: " + std::string(e.what()));
  }
  if (opts.verify_checksums) {
    for (const auto& [file, sum] : m.at("checksums").items()) {
      if (!fs::exists(dir / file)) throw ChecksumError(file + " is listed in the manifest but missing");
      if (sha256_file(dir / file) != sum.get<std::string>()) throw ChecksumError(file + " does not match its checksum");
    }
  }
  for (const auto& s : m.at("splits")) {
    const auto name = s.at("name").get<std::string>();
    auto split = read_split_csv(dir / (name + ".csv"), name);
    if (split.rows.size() != s.at("rows").get<std::size_t>()) {
      throw ChecksumError(name + ".csv row count differs from the manifest");
    }
    ds.splits.push_back(std::move(split));
  }
  return ds;
}

}  // namespace lt
