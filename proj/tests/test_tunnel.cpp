#include "doctest.h"
#include "ltbench/errors.hpp"
#include "ltbench/tunnel.hpp"
#include "support.hpp"

using namespace lt;

namespace {

std::string range_field(const TunnelInputs& x) {
  try {
    validate_inputs(x);
  } catch (const RangeError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("validate_inputs accepts boundary values") {
  TunnelInputs x;
  x.red = 255;
  x.theta1 = -90;
  x.diode_ir = {2, 2, 2};
  x.diode_vis = {1, 1, 1};
  x.t_ir = {3, 3, 3};
  x.t_vis = {0, 0, 0};
  CHECK(validate_inputs(x) == x);
  x.theta1 = -180;
  x.theta2 = 180;
  CHECK_NOTHROW(validate_inputs(x));
}

TEST_CASE("validate_inputs names the offending field") {
  TunnelInputs x;
  x.red = 256;
  CHECK(range_field(x) == "R");
  x = {};
  x.blue = -0.5;
  CHECK(range_field(x) == "B");
  x = {};
  x.v_c = 3.3;
  CHECK(range_field(x) == "v_c");
  x = {};
  x.theta2 = 180.1;
  CHECK(range_field(x) == "theta2");
  x = {};
  x.diode_vis[1] = 2;
  CHECK(range_field(x) == "diode_vis_2");
  x = {};
  x.t_ir[2] = 4;
  CHECK(range_field(x) == "t_ir_3");
  x = {};
  x.v_angle_2 = 0.0;
  CHECK(range_field(x) == "v_angle_2");
  x = {};
  x.green = std::nan("");
  CHECK(range_field(x) == "G");
}

TEST_CASE("quantize_inputs rounding examples") {
  TunnelInputs x;
  x.theta1 = 12.34;
  x.red = 100.5;
  x.theta2 = -0.05;
  const auto q = quantize_inputs(x);
  CHECK(q.theta1 == 12.3);
  CHECK(q.theta1 == round_to_tenth(12.3));
  CHECK(q.red == 101.0);
  CHECK(q.theta2 == round_to_tenth(-0.1));
  CHECK(q.theta2 < 0.0);
  CHECK(quantize_inputs(TunnelInputs{.red = 2.5}).red == 3.0);
  CHECK(q.diode_ir == x.diode_ir);
  CHECK(q.v_c == x.v_c);
}

TEST_CASE("quantize is idempotent and keeps inputs valid") {
  CounterRng rng(11);
  for (int i = 0; i < 20000; ++i) {
    const auto x = test::random_inputs(rng);
    const auto q = quantize_inputs(x);
    REQUIRE(quantize_inputs(q) == q);
    REQUIRE_NOTHROW(validate_inputs(q));
  }
}

TEST_CASE("image tensor shape") {
  CHECK_THROWS_AS(ImageTensor(std::vector<float>(10)), ShapeError);
  ImageTensor img;
  img.at(63, 63, 2) = 0.5f;
  CHECK(img.pixels().back() == 0.5f);
  CHECK(img.pixels().size() == 64u * 64u * 3u);
}

TEST_CASE("encoding table validation") {
  EncodingTable e;
  e.columns = {"z0", "z1"};
  e.codes = RowMatrix::Zero(3, 2);
  CHECK_NOTHROW(validate_encoding(e, 3));
  CHECK_THROWS(validate_encoding(e, 4));
  e.codes(1, 1) = std::nan("");
  CHECK_THROWS(validate_encoding(e, 3));
  e.codes(1, 1) = 0;
  e.group_labels = {"R"};
  CHECK_THROWS(validate_encoding(e, 3));
}
