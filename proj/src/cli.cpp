#include "ltbench/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ltbench/dataset_io.hpp"
#include "ltbench/datasets.hpp"
#include "ltbench/errors.hpp"
#include "ltbench/fetch.hpp"
#include "ltbench/image.hpp"
#include "ltbench/metrics.hpp"
#include "ltbench/png_io.hpp"
#include "ltbench/supervised.hpp"
#include "ltbench/table_io.hpp"

namespace fs = std::filesystem;

namespace lt {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir;
  bool quantize = false;
  nlohmann::json config = nlohmann::json::object();
};

struct SimulateArgs {
  std::string inputs;
  std::string params;
  bool device_rounding = false;
  bool images = false;
};

struct FitArgs {
  std::string calibration;
};

struct GenArgs {
  std::string params;
  std::size_t samples_per_env = 10000;
  std::size_t length = 100000;
  std::size_t eval_samples = 1000;
  bool no_images = false;
  bool device_rounding = false;
};

struct DecoderArgs {
  std::size_t samples = 5000;
  std::size_t test = 500;
  std::size_t hidden = 4096;
  std::size_t epochs = 100;
  std::size_t batch = 4096;
  double lr = 1e-3;
  double wd = 1e-5;
};

struct SupervisedArgs {
  std::string data;
  std::size_t train = 5000;
  std::size_t test = 500;
  std::size_t epochs = 100;
  std::size_t batch = 64;
  double lr = 1e-3;
};

struct EvalArgs {
  std::string truth, learned, estimate;
  bool threshold = false;
  std::string view_a, view_b, factors, latents;
  std::string pair = "view1,view2";
  std::vector<std::size_t> select;
  std::vector<std::string> groups;
  bool mlp = false;
};

struct FetchArgs {
  std::string name;
  std::string cache_dir;
};

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

SensorParams load_params(const Globals& g, const std::string& path) {
  if (!path.empty()) return params_from_json(read_json_file(path));
  if (g.config.contains("params")) return params_from_json(g.config.at("params"));
  return example_params();
}

GeneratorOptions generator_options(const Globals& g, const std::string& params_path, bool device_rounding) {
  GeneratorOptions o;
  o.params = load_params(g, params_path);
  if (g.config.contains("sensor_config")) o.config = sensor_config_from_json(g.config.at("sensor_config"));
  o.quantize = g.quantize;
  o.device_rounding = device_rounding;
  bool rings = true;
  if (g.config.contains("image")) rings = g.config.at("image").value("frame_rings", true);
  o.images = ImageSource::analytic(o.params, AnalyticImageOptions{rings});
  return o;
}

fs::path require_out(const Globals& g) {
  if (g.out_dir.empty()) throw CLI::RequiredError("--out");
  fs::create_directories(g.out_dir);
  return g.out_dir;
}

void emit_report(const Globals& g, const nlohmann::json& report, std::ostream& out, const std::string& file) {
  out << report.dump(2) << '\n';
  if (!g.out_dir.empty()) {
    fs::create_directories(g.out_dir);
    std::ofstream(fs::path(g.out_dir) / file) << report.dump(2) << '\n';
  }
}

TunnelInputs inputs_from_row(const CsvTable& t, std::size_t r, const SensorConfig& defaults) {
  FactorVector f{};
  for (std::size_t k = 0; k < kNumFactors; ++k) f[k] = t.number(r, static_cast<std::size_t>(t.column(kFactorColumns[k])));
  TunnelInputs x = defaults.inputs(f);
  auto opt_int = [&](const std::string& col, int& dst) {
    if (const long c = t.column(col); c >= 0) dst = static_cast<int>(t.number(r, static_cast<std::size_t>(c)));
  };
  auto opt_real = [&](const std::string& col, double& dst) {
    if (const long c = t.column(col); c >= 0) dst = t.number(r, static_cast<std::size_t>(c));
  };
  for (std::size_t j = 0; j < 3; ++j) {
    const auto s = std::to_string(j + 1);
    opt_int("diode_ir_" + s, x.diode_ir[j]);
    opt_int("diode_vis_" + s, x.diode_vis[j]);
    opt_int("t_ir_" + s, x.t_ir[j]);
    opt_int("t_vis_" + s, x.t_vis[j]);
  }
  opt_real("v_c", x.v_c);
  opt_real("v_angle_1", x.v_angle_1);
  opt_real("v_angle_2", x.v_angle_2);
  return x;
}

int cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out) {
  const auto opts = generator_options(g, a.params, a.device_rounding);
  const auto t = read_csv(a.inputs);
  std::vector<std::string> required(kFactorColumns.begin(), kFactorColumns.end());
  t.require(required);
  DatasetSplit split{"simulated", {}};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto x = inputs_from_row(t, r, opts.config);
    if (g.quantize) x = quantize_inputs(x);
    DatasetRow row;
    row.inputs = validate_inputs(x);
    row.readings = simulate_sensors(row.inputs, opts.params, SimulateOptions{a.device_rounding});
    row.latent = device_factors(row.inputs);
    row.env = "input";
    split.rows.push_back(std::move(row));
  }
  const auto dir = require_out(g);
  if (a.images) {
    fs::create_directories(dir / "images");
    for (std::size_t i = 0; i < split.rows.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "images/%06zu.png", i);
      split.rows[i].image = name;
      write_png(dir / name, opts.images->render(split.rows[i].inputs));
    }
  }
  write_split_csv(dir / "simulated.csv", split, a.images);
  out << "wrote " << split.rows.size() << " rows to " << (dir / "simulated.csv").string() << '\n';
  return 0;
}

int cmd_fit(const Globals& g, const FitArgs& a, std::ostream& out) {
  const auto split = read_split_csv(a.calibration, "calibration");
  std::vector<CalibrationRow> rows;
  for (const auto& r : split.rows) rows.push_back({r.inputs, r.readings});
  FitOptions fo = FitOptions::from(load_params(g, ""));
  if (g.config.contains("distances")) {
    const auto& d = g.config.at("distances");
    fo.d1 = d.value("d1", fo.d1);
    fo.d2 = d.value("d2", fo.d2);
    fo.d3 = d.value("d3", fo.d3);
  }
  const auto rep = fit_params(rows, fo);
  nlohmann::json j = {{"params", params_to_json(rep.params)},
                      {"residual_rms",
                       {{"sensor1", rep.residual_rms.sensor1},
                        {"sensor2", rep.residual_rms.sensor2},
                        {"sensor3", rep.residual_rms.sensor3},
                        {"current", rep.residual_rms.current},
                        {"angle", rep.residual_rms.angle}}},
                      {"angle_rows_used", rep.angle_rows_used}};
  emit_report(g, j, out, "fit.json");
  if (!g.out_dir.empty()) std::ofstream(fs::path(g.out_dir) / "params.json") << params_to_json(rep.params).dump(2) << '\n';
  return 0;
}

ScmSpec scm_from_config(const Globals& g, std::size_t samples_per_env) {
  nlohmann::json j = g.config.value("scm", nlohmann::json::object());
  j["seed"] = g.seed;
  if (!j.contains("samples_per_env")) j["samples_per_env"] = samples_per_env;
  return scm_from_json(j);
}

int cmd_gen(const Globals& g, const std::string& kind, const GenArgs& a, std::ostream& out) {
  const auto opts = generator_options(g, a.params, a.device_rounding);
  const auto dir = require_out(g);
  Dataset ds;
  if (kind == "ccrl") {
    ds = build_ccrl_dataset(scm_from_config(g, a.samples_per_env), opts);
  } else if (kind == "multiview") {
    const auto views = g.config.contains("views") ? views_from_json(g.config.at("views")) : ViewSpec::standard();
    ds = build_multiview_dataset(scm_from_config(g, a.samples_per_env), views, opts);
  } else {
    nlohmann::json j = g.config.value("temporal", nlohmann::json::object());
    j["seed"] = g.seed;
    if (!j.contains("length")) j["length"] = a.length;
    if (!j.contains("eval_samples")) j["eval_samples"] = a.eval_samples;
    ds = build_citris_dataset(temporal_from_json(j), opts);
  }
  write_dataset(ds, dir, WriteOptions{!a.no_images});
  out << "wrote " << ds.total_rows() << " rows (" << kind << ") to " << dir.string() << '\n';
  return 0;
}

int cmd_train_decoder(const Globals& g, const DecoderArgs& a, std::ostream& out) {
  const auto dir = require_out(g);
  const auto params = load_params(g, "");
  const auto source = ImageSource::analytic(params);
  SensorConfig cfg;
  std::vector<TunnelInputs> xs;
  for (std::size_t i = 0; i < a.samples + a.test; ++i) xs.push_back(cfg.inputs(sample_uniform_factors(g.seed, i)));
  const auto images = source.render_batch(xs);
  const std::span<const TunnelInputs> all_x(xs);
  const std::span<const ImageTensor> all_i(images);
  DecoderTrainConfig tc;
  tc.spec.hidden_width = a.hidden;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.lr = a.lr;
  tc.weight_decay = a.wd;
  tc.seed = g.seed;
  tc.on_epoch = [&](std::size_t e, double loss) { out << "epoch " << e + 1 << " loss " << loss << '\n'; };
  const auto res = train_decoder(all_x.first(a.samples), all_i.first(a.samples), tc);
  const double mse = decoder_pixel_mse(res.net, all_x.subspan(a.samples), all_i.subspan(a.samples));
  save_weights_file(res.net, (dir / "decoder.ltnn").string());
  emit_report(g,
              {{"heldout_pixel_mse", mse},
               {"hidden_width", a.hidden},
               {"epochs", a.epochs},
               {"loss_history", res.loss_history}},
              out, "decoder_report.json");
  return 0;
}

int cmd_supervised(const Globals& g, const SupervisedArgs& a, std::ostream& out) {
  Dataset ds = a.data.empty() ? build_uniform_dataset(a.train + a.test, g.seed, generator_options(g, "", false))
                              : read_dataset(a.data);
  SupervisedConfig c;
  c.train = a.train;
  c.test = a.test;
  c.epochs = a.epochs;
  c.batch_size = a.batch;
  c.lr = a.lr;
  c.seed = g.seed;
  const auto rep = supervised_check(ds, c);
  emit_report(g, to_json(rep), out, "supervised.json");
  return 0;
}

RowMatrix load_matrix(const std::string& path) { return read_numeric_csv(path).values; }

int cmd_eval(const Globals& g, const std::string& which, const EvalArgs& a, std::ostream& out) {
  ReadoutConfig rc;
  rc.seed = g.seed;
  if (a.mlp) rc.kind = ReadoutKind::mlp;
  if (which == "mcc") {
    const auto t = load_matrix(a.truth), l = load_matrix(a.learned);
    if (t.rows() != l.rows() || t.cols() != l.cols()) {
      throw SchemaError("truth is " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ", learned is " +
                        std::to_string(l.rows()) + "x" + std::to_string(l.cols()));
    }
    const auto r = mcc(t, l);
    out << format_score(r.score) << '\n';
    if (!g.out_dir.empty()) {
      fs::create_directories(g.out_dir);
      std::ofstream(fs::path(g.out_dir) / "mcc.json") << to_json(r).dump(2) << '\n';
    }
    return 0;
  }
  if (which == "shd") {
    const auto t = load_matrix(a.truth);
    auto e = load_matrix(a.estimate);
    if (t.rows() != t.cols() || e.rows() != e.cols() || t.rows() != e.rows()) {
      throw SchemaError("adjacency matrices must be square with equal dimensions");
    }
    if (a.threshold) e = threshold_to_match(e, static_cast<std::size_t>((t.array() != 0.0).count()));
    out << shd(t, e) << '\n';
    return 0;
  }
  if (which == "block-r2") {
    const auto fa = load_matrix(a.view_a), fb = load_matrix(a.view_b), f = load_matrix(a.factors);
    const auto views = g.config.contains("views") ? views_from_json(g.config.at("views")) : ViewSpec::standard();
    const auto comma = a.pair.find(',');
    if (comma == std::string::npos) throw CLI::ValidationError("--pair", "expected two view names separated by a comma");
    const std::pair<std::size_t, std::size_t> pair{views.index_of(a.pair.substr(0, comma)),
                                                   views.index_of(a.pair.substr(comma + 1))};
    std::vector<std::size_t> sel = a.select;
    if (sel.empty())
      for (Eigen::Index c = 0; c < fa.cols(); ++c) sel.push_back(static_cast<std::size_t>(c));
    emit_report(g, to_json(block_r2(fa, fb, f, sel, views, pair, rc)), out, "block_r2.json");
    return 0;
  }
  const auto z = load_matrix(a.latents), f = load_matrix(a.factors);
  emit_report(g, to_json(grouped_corr_matrices(z, a.groups, f, rc)), out, "grouped.json");
  return 0;
}

int cmd_fetch(const FetchArgs& a, std::ostream& out) {
  FetchOptions o;
  o.cache_dir = a.cache_dir;
  const auto r = fetch_remote(a.name, Registry::load_default(), o);
  out << r.path.string() << '\n';
  return 0;
}

const CLI::App* deepest(const CLI::App& app) {
  for (const auto* sub : app.get_subcommands()) return deepest(*sub);
  return &app;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Light-tunnel simulator and representation-learning benchmark harness", "ltbench"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--config", g.config_path, "JSON configuration document")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "Output directory");
  app.add_flag("--quantize", g.quantize, "Round inputs to device resolution before simulating");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate sensor readings (and images) for an inputs CSV");
  s->add_option("--inputs", sim.inputs, "CSV with red, green, blue, pol_1, pol_2 columns")->required()->check(CLI::ExistingFile);
  s->add_option("--params", sim.params, "Sensor parameter JSON")->check(CLI::ExistingFile);
  s->add_flag("--device-rounding", sim.device_rounding, "Round and clip readings to device ranges");
  s->add_flag("--images", sim.images, "Also render images");

  FitArgs fit;
  auto* f = app.add_subcommand("fit-params", "Fit sensor parameters to a calibration CSV");
  f->add_option("--calibration", fit.calibration, "CSV with tunnel inputs and readings")->required()->check(CLI::ExistingFile);

  GenArgs gen;
  auto* gn = app.add_subcommand("gen", "Generate a dataset");
  gn->require_subcommand(1);
  for (const char* kind : {"ccrl", "multiview", "citris"}) {
    auto* k = gn->add_subcommand(kind, std::string("Generate the ") + kind + " dataset");
    k->add_option("--params", gen.params, "Sensor parameter JSON")->check(CLI::ExistingFile);
    k->add_flag("--no-images", gen.no_images, "Skip rendering images");
    k->add_flag("--device-rounding", gen.device_rounding, "Round and clip readings to device ranges");
    if (std::string(kind) == "citris") {
      k->add_option("--length", gen.length, "Sequence length")->capture_default_str();
      k->add_option("--eval-samples", gen.eval_samples, "Rows in the iid evaluation split")->capture_default_str();
    } else {
      k->add_option("--samples-per-env", gen.samples_per_env, "Rows per environment")->capture_default_str();
    }
  }

  DecoderArgs dec;
  auto* d = app.add_subcommand("train-decoder", "Train the image decoder on analytic images");
  d->add_option("--samples", dec.samples, "Training pairs")->capture_default_str();
  d->add_option("--test", dec.test, "Held-out pairs")->capture_default_str();
  d->add_option("--hidden-width", dec.hidden, "Hidden layer width")->capture_default_str();
  d->add_option("--epochs", dec.epochs)->capture_default_str();
  d->add_option("--batch-size", dec.batch)->capture_default_str();
  d->add_option("--lr", dec.lr)->capture_default_str();
  d->add_option("--weight-decay", dec.wd)->capture_default_str();

  SupervisedArgs sup;
  auto* sc = app.add_subcommand("supervised-check", "Supervised image-to-factor regression check");
  sc->add_option("--data", sup.data, "Dataset directory (default: generate iid-uniform rows)")->check(CLI::ExistingDirectory);
  sc->add_option("--train", sup.train)->capture_default_str();
  sc->add_option("--test", sup.test)->capture_default_str();
  sc->add_option("--epochs", sup.epochs)->capture_default_str();
  sc->add_option("--batch-size", sup.batch)->capture_default_str();
  sc->add_option("--lr", sup.lr)->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score representations or graphs");
  e->require_subcommand(1);
  auto* em = e->add_subcommand("mcc", "Mean correlation coefficient");
  em->add_option("--truth", ev.truth)->required()->check(CLI::ExistingFile);
  em->add_option("--learned", ev.learned)->required()->check(CLI::ExistingFile);
  auto* es = e->add_subcommand("shd", "Structural Hamming distance");
  es->add_option("--truth", ev.truth)->required()->check(CLI::ExistingFile);
  es->add_option("--estimate", ev.estimate)->required()->check(CLI::ExistingFile);
  es->add_flag("--threshold", ev.threshold, "Binarize the estimate to the truth's edge count");
  auto* eb = e->add_subcommand("block-r2", "Block-identifiability R^2 for a view pair");
  eb->add_option("--view-a", ev.view_a)->required()->check(CLI::ExistingFile);
  eb->add_option("--view-b", ev.view_b)->required()->check(CLI::ExistingFile);
  eb->add_option("--factors", ev.factors)->required()->check(CLI::ExistingFile);
  eb->add_option("--pair", ev.pair, "Two view names, comma separated")->capture_default_str();
  eb->add_option("--select", ev.select, "Content columns of the encodings")->delimiter(',');
  eb->add_flag("--mlp", ev.mlp, "Use the MLP readout");
  auto* eg = e->add_subcommand("grouped", "Grouped R^2 / Spearman matrices");
  eg->add_option("--latents", ev.latents)->required()->check(CLI::ExistingFile);
  eg->add_option("--factors", ev.factors)->required()->check(CLI::ExistingFile);
  eg->add_option("--groups", ev.groups, "Factor name or NA per latent column")->required()->delimiter(',');
  eg->add_flag("--mlp", ev.mlp, "Use the MLP readout");

  FetchArgs fe;
  auto* fc = app.add_subcommand("fetch", "Download a published dataset into the cache");
  fc->add_option("name", fe.name)->required();
  fc->add_option("--cache-dir", fe.cache_dir);

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << deepest(app)->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n' << deepest(app)->help();
    return 1;
  }

  try {
    if (!g.config_path.empty()) g.config = read_json_file(g.config_path);
    if (*s) return cmd_simulate(g, sim, out);
    if (*f) return cmd_fit(g, fit, out);
    if (*gn) return cmd_gen(g, gn->get_subcommands().front()->get_name(), gen, out);
    if (*d) return cmd_train_decoder(g, dec, out);
    if (*sc) return cmd_supervised(g, sup, out);
    if (*e) return cmd_eval(g, e->get_subcommands().front()->get_name(), ev, out);
    if (*fc) return cmd_fetch(fe, out);
  } catch (const CLI::Error& ex) {
    err << "error: " << ex.what() << '\n' << deepest(app)->help();
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace lt
