#include <cmath>
#include <vector>

#include "doctest.h"
#include "ltbench/errors.hpp"
#include "ltbench/sensors.hpp"
#include "support.hpp"

using namespace lt;

namespace {

TunnelInputs base_inputs() {
  TunnelInputs x;
  x.red = 120;
  x.green = 80;
  x.blue = 200;
  x.theta1 = 10;
  x.theta2 = -25;
  x.diode_ir = {1, 1, 1};
  x.diode_vis = {1, 1, 1};
  x.t_ir = {2, 2, 3};
  x.t_vis = {2, 2, 3};
  return x;
}

std::vector<double> light(const SensorReadings& r) {
  return {r.ir[0], r.ir[1], r.ir[2], r.vis[0], r.vis[1], r.vis[2]};
}

}  // namespace

TEST_CASE("zero light gives zero counts and base current") {
  const auto p = example_params();
  TunnelInputs x = base_inputs();
  x.red = x.green = x.blue = 0;
  const auto r = simulate_sensors(x, p);
  for (double v : light(r)) CHECK(v == 0.0);
  CHECK(r.current == p.C0);
}

TEST_CASE("Malus endpoints") {
  const auto p = example_params();
  const auto same = malus_factor(33.3, 33.3, p);
  const auto crossed = malus_factor(40.0, -50.0, p);
  for (int c = 0; c < 3; ++c) {
    CHECK(same[c] == p.Tp[c]);
    CHECK(crossed[c] == p.Tc[c]);
  }
  CHECK(cos_squared_deg(90.0) == 0.0);
  CHECK(cos_squared_deg(-270.0) == 0.0);
  CHECK(cos_squared_deg(180.0) == 1.0);
  CHECK(cos_squared_deg(0.0) == 1.0);
}

TEST_CASE("angle zero point and clamp") {
  const auto p = example_params();
  TunnelInputs x = base_inputs();
  x.theta1 = 0;
  CHECK(simulate_sensors(x, p).angle_1 == p.a1);
  x.theta1 = 170;
  x.v_angle_1 = 1.1;
  CHECK(simulate_sensors(x, p).angle_1 == 1023.0);
}

TEST_CASE("one more exposure step doubles the reading") {
  const auto p = example_params();
  TunnelInputs x = base_inputs();
  const auto r0 = simulate_sensors(x, p);
  x.t_ir[0] += 1;
  const auto r1 = simulate_sensors(x, p);
  CHECK(r1.ir[0] == 2.0 * r0.ir[0]);
  CHECK(r1.vis[0] == r0.vis[0]);
}

TEST_CASE("calibration formulas") {
  CHECK(calibrate_current(0, 5) == 0.0);
  CHECK(calibrate_current(1023, 5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(calibrate_current(511.5, 5) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(calibrate_angle(507, 1, 5) == 0.0);
  CHECK(calibrate_angle(512, 2, 5) == 0.0);
  CHECK(calibrate_angle(507 + 1023.0 / 720.0 * 10.0, 1, 5) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK_THROWS_AS(calibrate_current(1024, 5), RangeError);
  CHECK_THROWS_AS(calibrate_current(-1, 5), RangeError);
  CHECK_THROWS_AS(calibrate_angle(10, 3, 5), RangeError);
  CHECK_THROWS_AS(calibrate_angle(10, 1, 3.3), RangeError);
}

TEST_CASE("parameter validation") {
  auto p = example_params();
  CHECK_NOTHROW(validate_params(p));
  p.Tc[1] = p.Tp[1] + 0.01;
  CHECK_THROWS_AS(validate_params(p), ParamError);
  p = example_params();
  p.d2 = p.d3;
  CHECK_THROWS_AS(simulate_sensors(base_inputs(), p), ParamError);
  p = example_params();
  p.S[1][2] = -1;
  CHECK_THROWS_AS(validate_params(p), ParamError);
  p = example_params();
  p.A = 0;
  CHECK_THROWS_AS(validate_params(p), ParamError);
}

TEST_CASE("property: linear in rgb") {
  const auto p = example_params();
  CounterRng rng(3);
  for (int i = 0; i < 2000; ++i) {
    auto x = test::random_inputs(rng);
    const double alpha = rng.uniform(0.0, 1.0);
    auto y = x;
    y.red *= alpha;
    y.green *= alpha;
    y.blue *= alpha;
    const auto rx = simulate_sensors(x, p);
    const auto ry = simulate_sensors(y, p);
    const auto lx = light(rx), ly = light(ry);
    for (std::size_t k = 0; k < lx.size(); ++k) REQUIRE(std::abs(ly[k] - alpha * lx[k]) <= 1e-12 * std::abs(lx[k]) + 1e-12);
    const double base = p.C0 * 5.0 / x.v_c;
    REQUIRE(std::abs((ry.current - base) - alpha * (rx.current - base)) <= 1e-12 * rx.current);
  }
}

TEST_CASE("property: sensor 3 nonincreasing in the polarizer gap") {
  const auto p = example_params();
  TunnelInputs x = base_inputs();
  x.theta2 = 0;
  double prev_ir = INFINITY, prev_vis = INFINITY;
  for (double d = 0.0; d <= 90.0; d += 0.5) {
    x.theta1 = d;
    const auto r = simulate_sensors(x, p);
    REQUIRE(r.ir[2] <= prev_ir);
    REQUIRE(r.vis[2] <= prev_vis);
    prev_ir = r.ir[2];
    prev_vis = r.vis[2];
  }
}

TEST_CASE("property: inverse-square ratio with unit transmission") {
  auto p = example_params();
  p.Ts = {1, 1, 1};
  p.Tp = {1, 1, 1};
  CounterRng rng(5);
  for (int i = 0; i < 500; ++i) {
    auto x = test::random_inputs(rng);
    x.diode_ir = {1, 1, 1};
    x.t_ir = {2, 2, 2};
    x.diode_vis = {0, 0, 0};
    x.t_vis = {1, 1, 1};
    const auto r = simulate_sensors(x, p);
    if (r.ir[0] == 0.0) continue;
    REQUIRE(r.ir[1] / r.ir[0] == doctest::Approx((p.d1 / p.d2) * (p.d1 / p.d2)).epsilon(1e-14));
    REQUIRE(r.vis[1] / r.vis[0] == doctest::Approx((p.d1 / p.d2) * (p.d1 / p.d2)).epsilon(1e-14));
  }
}

TEST_CASE("property: calibrated angle is affine in theta below saturation") {
  const auto p = example_params();
  CounterRng rng(9);
  for (int i = 0; i < 2000; ++i) {
    auto x = test::random_inputs(rng);
    x.theta1 = rng.uniform(-90.0, 90.0);
    x.v_angle_1 = 5.0;
    const auto r = simulate_sensors(x, p);
    REQUIRE(r.angle_1 < 1023.0);
    // (A theta + a1 - Z1) * 720 / 1023, and A = 1023 / 720, a1 = Z1.
    const double expected = (p.A * x.theta1 + p.a1 - SensorParams::Z1) * 720.0 / 1023.0;
    REQUIRE(calibrate_angle(r.angle_1, 1, 5.0) == doctest::Approx(expected).epsilon(1e-12));
    REQUIRE(calibrate_angle(r.angle_1, 1, 5.0) == doctest::Approx(x.theta1).epsilon(1e-12));
  }
}

TEST_CASE("property: angles never exceed 1023 and outputs are nonnegative") {
  const auto p = example_params();
  CounterRng rng(13);
  for (int i = 0; i < 20000; ++i) {
    auto x = test::random_inputs(rng);
    const auto r = simulate_sensors(x, p);
    REQUIRE(r.angle_1 <= 1023.0);
    REQUIRE(r.angle_2 <= 1023.0);
    for (double v : light(r)) REQUIRE(v >= 0.0);
    REQUIRE(r.current >= 0.0);
  }
}

TEST_CASE("device rounding clips after gain") {
  const auto p = example_params();
  TunnelInputs x = base_inputs();
  x.red = x.green = x.blue = 255;
  x.diode_ir = {2, 2, 2};
  x.t_ir = {3, 3, 3};
  const auto raw = simulate_sensors(x, p);
  const auto dev = simulate_sensors(x, p, SimulateOptions{true});
  CHECK(raw.ir[0] > 65535.0);
  CHECK(dev.ir[0] == 65535.0);
  CHECK(dev.vis[0] == std::round(raw.vis[0]));
  CHECK(dev.current == std::round(raw.current));
}

TEST_CASE("simulation is deterministic") {
  const auto p = example_params();
  CounterRng rng(1);
  const auto x = test::random_inputs(rng);
  CHECK(simulate_sensors(x, p) == simulate_sensors(x, p));
}

namespace {

std::vector<CalibrationRow> calibration_set(const SensorParams& p, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<CalibrationRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = test::random_inputs(rng);
    x.theta1 = rng.uniform(-90.0, 90.0);
    x.theta2 = rng.uniform(-90.0, 90.0);
    rows.push_back({x, simulate_sensors(x, p)});
  }
  return rows;
}

}  // namespace

TEST_CASE("fit_params recovers noise-free parameters") {
  const auto p = example_params();
  const auto rows = calibration_set(p, 400, 21);
  const auto rep = fit_params(rows, FitOptions::from(p));
  const auto& q = rep.params;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) CHECK(test::rel_err(q.S[r][c], p.S[r][c]) < 1e-10);
  for (int c = 0; c < 3; ++c) {
    CHECK(test::rel_err(q.Ts[c], p.Ts[c]) < 1e-10);
    CHECK(test::rel_err(q.Tp[c], p.Tp[c]) < 1e-10);
    CHECK(test::rel_err(q.Tc[c], p.Tc[c]) < 1e-9);
    CHECK(test::rel_err(q.Q[c], p.Q[c]) < 1e-10);
  }
  CHECK(test::rel_err(q.C0, p.C0) < 1e-10);
  CHECK(test::rel_err(q.A, p.A) < 1e-10);
  CHECK(test::rel_err(q.a1, p.a1) < 1e-10);
  CHECK(test::rel_err(q.a2, p.a2) < 1e-10);
  CHECK(rep.residual_rms.sensor3 < 1e-8);
}

TEST_CASE("fit_params failure modes") {
  const auto p = example_params();
  auto rows = calibration_set(p, 2, 4);
  rows[1] = rows[0];
  CHECK_THROWS_AS(fit_params(rows, FitOptions::from(p)), RankDeficient);

  auto sat = calibration_set(p, 50, 8);
  for (auto& r : sat) {
    r.readings.angle_1 = 1023;
    r.readings.angle_2 = 1023;
  }
  CHECK_THROWS_AS(fit_params(sat, FitOptions::from(p)), Saturated);
  CHECK_THROWS_AS(fit_params(sat, FitOptions{10, 5, 20}), ParamError);
}

TEST_CASE("parameter JSON round trip") {
  const auto p = example_params();
  const auto j = params_to_json(p);
  CHECK(j.at("Z1") == 507.0);
  CHECK(j.at("S").size() == 2);
  CHECK(params_from_json(j) == p);
  auto bad = j;
  bad["Z2"] = 500;
  CHECK_THROWS_AS(params_from_json(bad), ParamError);
}
