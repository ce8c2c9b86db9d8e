#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ltbench/checksum.hpp"
#include "ltbench/cli.hpp"
#include "ltbench/dataset_io.hpp"
#include "ltbench/errors.hpp"
#include "ltbench/png_io.hpp"
#include "ltbench/table_io.hpp"
#include "support.hpp"

using namespace lt;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ltbench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb || fa.empty()) return false;
  for (const auto& f : fa)
    if (slurp(a / f) != slurp(b / f)) return false;
  return true;
}

Dataset small_ccrl(std::size_t per_env, std::uint64_t seed) {
  auto spec = ScmSpec::with_graph(ScmSpec::placeholder_graph(), seed);
  spec.samples_per_env = per_env;
  return build_ccrl_dataset(spec);
}

}  // namespace

TEST_CASE("column layout") {
  const auto& c = data_columns();
  REQUIRE(c.size() == 29);
  CHECK(c.front() == "red");
  CHECK(c[3] == "pol_1");
  CHECK(c[5] == "ir_1");
  CHECK(c.back() == "v_angle_2");
  const auto full = dataset_columns(true);
  CHECK(full.back() == "image");
  CHECK(std::find(full.begin(), full.end(), "z_theta2") != full.end());
}

TEST_CASE("doubles survive text round trip bitwise") {
  CounterRng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    REQUIRE(parse_double(format_double(v), "v") == v);
  }
  CHECK_THROWS_AS(parse_double("1.5x", "cell"), FormatError);
  CHECK_THROWS_AS(parse_double("", "cell"), FormatError);
  CHECK(parse_double("-0.25", "cell") == -0.25);
}

TEST_CASE("dataset round trip") {
  test::TempDir dir("roundtrip");
  const auto ds = small_ccrl(50, 2);
  write_dataset(ds, dir.path(), WriteOptions{false});
  const auto back = read_dataset(dir.path());
  CHECK(back.kind == DatasetKind::ccrl);
  CHECK(back.seed == ds.seed);
  CHECK(back.params == ds.params);
  REQUIRE(back.splits.size() == ds.splits.size());
  for (std::size_t s = 0; s < ds.splits.size(); ++s) {
    CHECK(back.splits[s].name == ds.splits[s].name);
    CHECK(back.splits[s].rows == ds.splits[s].rows);
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("kind") == "ccrl");
  CHECK(manifest.at("checksums").contains("train.csv"));
}

TEST_CASE("missing column raises SchemaError naming it") {
  test::TempDir dir("schema");
  const auto ds = small_ccrl(10, 1);
  write_split_csv(dir / "train.csv", ds.split("train"), false);
  auto t = read_csv(dir / "train.csv");
  const auto col = static_cast<std::size_t>(t.column("pol_1"));
  t.header.erase(t.header.begin() + static_cast<long>(col));
  for (auto& r : t.rows) r.erase(r.begin() + static_cast<long>(col));
  t.header.push_back("extra_column");
  for (auto& r : t.rows) r.push_back("1");
  write_csv(dir / "train.csv", t);
  try {
    read_split_csv(dir / "train.csv", "train");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("pol_1") != std::string::npos);
  }
}

TEST_CASE("extra columns are ignored and z defaults to device values") {
  test::TempDir dir("extra");
  CsvTable t;
  t.header = data_columns();
  t.header.push_back("camera_exposure");
  std::vector<std::string> row;
  for (std::size_t i = 0; i < data_columns().size(); ++i) row.push_back("1");
  row[3] = "12.5";
  row.push_back("99");
  t.rows = {row, row};
  write_csv(dir / "all.csv", t);
  const auto ds = read_dataset(dir.path());
  CHECK(ds.kind == DatasetKind::custom);
  CHECK(ds.split("all").rows.size() == 2);
  CHECK(ds.split("all").rows[0].latent[kTheta1] == 12.5);
}

TEST_CASE("checksum mismatch raises ChecksumError") {
  test::TempDir dir("checksum");
  write_dataset(small_ccrl(20, 3), dir.path(), WriteOptions{false});
  auto text = slurp(dir / "val.csv");
  const auto pos = text.find_first_of("23456789", text.size() / 2);
  text[pos] = '1';
  spit(dir / "val.csv", text);
  CHECK_THROWS_AS(read_dataset(dir.path()), ChecksumError);
  CHECK_NOTHROW(read_dataset(dir.path(), ReadOptions{false}));
}

TEST_CASE("PNG round trip is exact at 8 bits") {
  test::TempDir dir("png");
  ImageTensor img;
  CounterRng rng(4);
  for (auto& v : img.pixels()) v = static_cast<float>(rng.uniform());
  write_png(dir / "a.png", img);
  const auto back = read_png(dir / "a.png");
  CHECK(back == quantize_8bit(img));
  write_png(dir / "b.png", back);
  CHECK(read_png(dir / "b.png") == back);
  spit(dir / "c.png", "not a png");
  CHECK_THROWS_AS(read_png(dir / "c.png"), FormatError);
}

TEST_CASE("dataset with images") {
  test::TempDir dir("images");
  const auto ds = small_ccrl(5, 4);
  write_dataset(ds, dir.path());
  CHECK(fs::exists(dir / "images" / "000000.png"));
  const auto back = read_dataset(dir.path());
  const auto& split = back.split("test");
  REQUIRE_FALSE(split.rows.empty());
  CHECK(!split.rows[0].image.empty());
  const auto loaded = render_images(back, split, 0, 1);
  const auto fresh = render_images(ds, ds.split("test"), 0, 1);
  CHECK(loaded[0] == quantize_8bit(fresh[0]));
}

TEST_CASE("sha256") {
  const std::string abc = "abc";
  const std::vector<std::uint8_t> bytes(abc.begin(), abc.end());
  CHECK(sha256_hex(bytes) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cli: gen is byte-identical across runs") {
  test::TempDir dir("cli-gen");
  const auto a = (dir / "d1").string(), b = (dir / "d2").string();
  REQUIRE(cli({"gen", "ccrl", "--seed", "7", "--out", a, "--samples-per-env", "30"}).code == 0);
  REQUIRE(cli({"gen", "ccrl", "--seed", "7", "--out", b, "--samples-per-env", "30"}).code == 0);
  CHECK(same_tree(a, b));
  CHECK(fs::exists(fs::path(a) / "images"));
  const auto c = (dir / "d3").string();
  REQUIRE(cli({"gen", "ccrl", "--seed", "8", "--out", c, "--samples-per-env", "30"}).code == 0);
  CHECK_FALSE(same_tree(a, c));
}

TEST_CASE("cli: eval mcc prints 1.0 for identical tables") {
  test::TempDir dir("cli-mcc");
  NumericTable t{{"a", "b", "c"}, RowMatrix(50, 3)};
  CounterRng rng(1);
  for (Eigen::Index i = 0; i < t.values.size(); ++i) t.values.data()[i] = rng.normal();
  write_numeric_csv(dir / "t.csv", t);
  const auto r = cli({"eval", "mcc", "--truth", (dir / "t.csv").string(), "--learned", (dir / "t.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "1.0\n");
}

TEST_CASE("cli: eval shd") {
  test::TempDir dir("cli-shd");
  NumericTable a{{"x0", "x1", "x2"}, RowMatrix::Zero(3, 3)};
  a.values(0, 1) = 1;
  NumericTable b = a;
  b.values(0, 1) = 0;
  b.values(1, 0) = 1;
  NumericTable c{{"x0", "x1"}, RowMatrix::Zero(2, 2)};
  write_numeric_csv(dir / "a.csv", a);
  write_numeric_csv(dir / "b.csv", b);
  write_numeric_csv(dir / "c.csv", c);
  const auto ok = cli({"eval", "shd", "--truth", (dir / "a.csv").string(), "--estimate", (dir / "b.csv").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out == "2\n");
  const auto bad = cli({"eval", "shd", "--truth", (dir / "a.csv").string(), "--estimate", (dir / "c.csv").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("SchemaError") != std::string::npos);
}

TEST_CASE("cli: usage errors") {
  const auto r = cli({"gen", "nope"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error") != std::string::npos);
  CHECK(cli({"eval", "mcc", "--truth", "/nonexistent.csv", "--learned", "/nonexistent.csv"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cli: simulate matches the library") {
  test::TempDir dir("cli-sim");
  CsvTable in;
  in.header = {"red", "green", "blue", "pol_1", "pol_2"};
  in.rows = {{"10", "20", "30", "0", "45"}, {"255", "0", "128", "-90", "90"}};
  write_csv(dir / "in.csv", in);
  const auto out = (dir / "o").string();
  REQUIRE(cli({"simulate", "--inputs", (dir / "in.csv").string(), "--out", out}).code == 0);
  const auto t = read_csv(fs::path(out) / "simulated.csv");
  REQUIRE(t.rows.size() == 2);
  TunnelInputs x = SensorConfig{}.inputs({255, 0, 128, -90, 90});
  const auto r = simulate_sensors(x, example_params());
  CHECK(t.number(1, static_cast<std::size_t>(t.column("ir_3"))) == r.ir[2]);
  CHECK(t.number(1, static_cast<std::size_t>(t.column("angle_2"))) == r.angle_2);
}
