#include "ltbench/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ltbench/errors.hpp"

namespace lt {

SensorParams example_params() {
  SensorParams p;
  p.S = {{{11.5, 7.2, 3.9}, {5.8, 13.6, 9.1}}};
  p.d1 = 53.0;
  p.d2 = 123.0;
  p.d3 = 190.0;
  p.Ts = {0.46, 0.41, 0.36};
  p.Tp = {0.39, 0.34, 0.29};
  p.Tc = {0.032, 0.018, 0.051};
  p.Q = {0.36, 0.31, 0.27};
  p.C0 = 41.0;
  p.A = 1023.0 / 720.0;  // one calibrated degree per degree at 5 V
  p.a1 = SensorParams::Z1;
  p.a2 = SensorParams::Z2;
  return p;
}

namespace {

bool nonneg(double v) { return v >= 0.0; }
bool unit(double v) { return v >= 0.0 && v <= 1.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ParamError(what);
}

}  // namespace

void validate_params(const SensorParams& p) {
  for (const auto& row : p.S) {
    for (double v : row) require(nonneg(v), "S must be nonnegative");
  }
  require(p.d1 > 0.0 && p.d2 > 0.0 && p.d3 > 0.0, "distances must be positive");
  require(p.d1 < p.d2 && p.d2 < p.d3, "distances must satisfy d1 < d2 < d3");
  for (int c = 0; c < 3; ++c) {
    require(unit(p.Ts[c]), "Ts must lie in [0,1]");
    require(unit(p.Tp[c]), "Tp must lie in [0,1]");
    require(unit(p.Tc[c]), "Tc must lie in [0,1]");
    require(p.Tc[c] <= p.Tp[c], "Tc must not exceed Tp");
    require(nonneg(p.Q[c]), "Q must be nonnegative");
  }
  require(nonneg(p.C0), "C0 must be nonnegative");
  require(p.A > 0.0, "A must be positive");
  require(nonneg(p.a1) && nonneg(p.a2), "a1, a2 must be nonnegative");
}

double cos_squared_deg(double delta_deg) noexcept {
  // (1 + cos 2x) / 2 is exactly 0 at odd multiples of 90 degrees and exactly 1
  // at multiples of 180, unlike squaring cos x.
  const double two_x = 2.0 * delta_deg * (std::numbers::pi / 180.0);
  return 0.5 * (1.0 + std::cos(two_x));
}

std::array<double, 3> malus_factor(double theta1_deg, double theta2_deg, const SensorParams& p) noexcept {
  const double c2 = cos_squared_deg(theta1_deg - theta2_deg);
  return {(p.Tp[0] - p.Tc[0]) * c2 + p.Tc[0], (p.Tp[1] - p.Tc[1]) * c2 + p.Tc[1],
          (p.Tp[2] - p.Tc[2]) * c2 + p.Tc[2]};
}

namespace {

constexpr double kLightMax = 65535.0;
constexpr double kAdcMax = 1023.0;

double gain(int diode, int exposure) noexcept { return std::ldexp(1.0, diode + exposure); }

/// S[row] . (w * rgb)
double response(const SensorParams& p, int row, const std::array<double, 3>& weights,
                const std::array<double, 3>& rgb) noexcept {
  return p.S[row][0] * weights[0] * rgb[0] + p.S[row][1] * weights[1] * rgb[1] +
         p.S[row][2] * weights[2] * rgb[2];
}

double device_clip(double v, double hi) noexcept { return std::clamp(std::round(v), 0.0, hi); }

}  // namespace

SensorReadings simulate_sensors_unchecked(const TunnelInputs& x, const SensorParams& p,
                                          const SimulateOptions& opts) noexcept {
  const auto rgb = x.rgb();
  const std::array<double, 3> ones = {1.0, 1.0, 1.0};
  const double att2 = (p.d1 / p.d2) * (p.d1 / p.d2);
  const double att3 = (p.d1 / p.d3) * (p.d1 / p.d3);
  const auto malus = malus_factor(x.theta1, x.theta2, p);

  SensorReadings r;
  r.ir[0] = gain(x.diode_ir[0], x.t_ir[0]) * response(p, 0, ones, rgb);
  r.vis[0] = gain(x.diode_vis[0], x.t_vis[0]) * response(p, 1, ones, rgb);
  r.ir[1] = gain(x.diode_ir[1], x.t_ir[1]) * att2 * response(p, 0, p.Ts, rgb);
  r.vis[1] = gain(x.diode_vis[1], x.t_vis[1]) * att2 * response(p, 1, p.Ts, rgb);
  r.ir[2] = gain(x.diode_ir[2], x.t_ir[2]) * att3 * response(p, 0, malus, rgb);
  r.vis[2] = gain(x.diode_vis[2], x.t_vis[2]) * att3 * response(p, 1, malus, rgb);

  r.current = (p.Q[0] * rgb[0] + p.Q[1] * rgb[1] + p.Q[2] * rgb[2] + p.C0) * (5.0 / x.v_c);
  r.angle_1 = std::min(kAdcMax, (p.A * x.theta1 + p.a1) * (5.0 / x.v_angle_1));
  r.angle_2 = std::min(kAdcMax, (p.A * x.theta2 + p.a2) * (5.0 / x.v_angle_2));

  if (opts.device_rounding) {
    for (int i = 0; i < 3; ++i) {
      r.ir[i] = device_clip(r.ir[i], kLightMax);
      r.vis[i] = device_clip(r.vis[i], kLightMax);
    }
    r.current = device_clip(r.current, kAdcMax);
    r.angle_1 = device_clip(r.angle_1, kAdcMax);
    r.angle_2 = device_clip(r.angle_2, kAdcMax);
  }
  return r;
}

SensorReadings simulate_sensors(const TunnelInputs& x, const SensorParams& p, const SimulateOptions& opts) {
  validate_params(p);
  return simulate_sensors_unchecked(x, p, opts);
}

double calibrate_current(double raw, double v_c) {
  if (!(raw >= 0.0 && raw <= kAdcMax)) throw RangeError("current", "raw count outside [0, 1023]");
  if (!is_reference_voltage(v_c)) throw RangeError("v_c", "not in {1.1, 2.56, 5}");
  return raw * v_c / (kAdcMax * 5.0) * 2.5;
}

double calibrate_angle(double raw, int j, double v_angle) {
  if (j != 1 && j != 2) throw RangeError("j", "angle sensor index must be 1 or 2");
  const std::string name = "angle_" + std::to_string(j);
  if (!(raw >= 0.0 && raw <= kAdcMax)) throw RangeError(name, "raw count outside [0, 1023]");
  if (!is_reference_voltage(v_angle)) throw RangeError("v_angle_" + std::to_string(j), "not in {1.1, 2.56, 5}");
  const double zero = j == 1 ? SensorParams::Z1 : SensorParams::Z2;
  return (raw - zero) * 720.0 / kAdcMax * v_angle / 5.0;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

/// Ordinary least squares with column equilibration and a rank check.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* block) {
  if (X.rows() < X.cols()) {
    throw RankDeficient(std::string(block) + ": fewer rows than unknowns");
  }
  Eigen::VectorXd scale(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double n = X.col(j).norm();
    scale(j) = n > 0.0 ? n : 1.0;
  }
  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    throw RankDeficient(std::string(block) + ": design matrix has rank " + std::to_string(qr.rank()) +
                        " < " + std::to_string(X.cols()));
  }
  return qr.solve(y).cwiseQuotient(scale);
}

double rms(double sum_sq, std::size_t n) { return n ? std::sqrt(sum_sq / static_cast<double>(n)) : 0.0; }

}  // namespace

FitReport fit_params(std::span<const CalibrationRow> rows, const FitOptions& opts) {
  if (!(opts.d1 > 0.0 && opts.d1 < opts.d2 && opts.d2 < opts.d3)) {
    throw ParamError("fit distances must satisfy 0 < d1 < d2 < d3");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  SensorParams p;
  p.d1 = opts.d1;
  p.d2 = opts.d2;
  p.d3 = opts.d3;

  // Sensor 1 sees the unpolarized source: counts / gain = S . rgb.
  Eigen::MatrixXd rgb(n, 3);
  Eigen::VectorXd y_ir(n), y_vis(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& x = rows[i].inputs;
    rgb.row(i) << x.red, x.green, x.blue;
    y_ir(i) = rows[i].readings.ir[0] / gain(x.diode_ir[0], x.t_ir[0]);
    y_vis(i) = rows[i].readings.vis[0] / gain(x.diode_vis[0], x.t_vis[0]);
  }
  const Eigen::VectorXd s_ir = least_squares(rgb, y_ir, "S (infrared)");
  const Eigen::VectorXd s_vis = least_squares(rgb, y_vis, "S (visible)");
  for (int c = 0; c < 3; ++c) {
    p.S[0][c] = s_ir(c);
    p.S[1][c] = s_vis(c);
  }

  // Current: C * R_C / 5 = Q . rgb + C0.
  {
    Eigen::MatrixXd X(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      X.row(i) << rgb.row(i), 1.0;
      y(i) = rows[i].readings.current * rows[i].inputs.v_c / 5.0;
    }
    const Eigen::VectorXd q = least_squares(X, y, "Q/C0");
    p.Q = {q(0), q(1), q(2)};
    p.C0 = q(3);
  }

  // Sensor 2 against the per-color contributions of the sensor-1 prediction.
  const double att2 = (p.d1 / p.d2) * (p.d1 / p.d2);
  const double att3 = (p.d1 / p.d3) * (p.d1 / p.d3);
  {
    Eigen::MatrixXd X(2 * n, 3);
    Eigen::VectorXd y(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& x = rows[i].inputs;
      for (int r = 0; r < 2; ++r) {
        const Eigen::Index k = 2 * i + r;
        for (int c = 0; c < 3; ++c) X(k, c) = att2 * p.S[r][c] * rgb(i, c);
        y(k) = r == 0 ? rows[i].readings.ir[1] / gain(x.diode_ir[1], x.t_ir[1])
                      : rows[i].readings.vis[1] / gain(x.diode_vis[1], x.t_vis[1]);
      }
    }
    const Eigen::VectorXd ts = least_squares(X, y, "Ts");
    p.Ts = {ts(0), ts(1), ts(2)};
  }

  // Sensor 3: contribution * (Tp cos^2 + Tc (1 - cos^2)).
  {
    Eigen::MatrixXd X(2 * n, 6);
    Eigen::VectorXd y(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& x = rows[i].inputs;
      const double c2 = cos_squared_deg(x.theta1 - x.theta2);
      for (int r = 0; r < 2; ++r) {
        const Eigen::Index k = 2 * i + r;
        for (int c = 0; c < 3; ++c) {
          const double contrib = att3 * p.S[r][c] * rgb(i, c);
          X(k, c) = contrib * c2;
          X(k, 3 + c) = contrib * (1.0 - c2);
        }
        y(k) = r == 0 ? rows[i].readings.ir[2] / gain(x.diode_ir[2], x.t_ir[2])
                      : rows[i].readings.vis[2] / gain(x.diode_vis[2], x.t_vis[2]);
      }
    }
    const Eigen::VectorXd t = least_squares(X, y, "Tp/Tc");
    p.Tp = {t(0), t(1), t(2)};
    p.Tc = {t(3), t(4), t(5)};
  }

  // Angle sensors, unsaturated rows only: reading * R_j / 5 = A theta_j + a_j.
  FitReport report;
  {
    std::vector<std::array<double, 4>> design;  // theta, [j==1], [j==2], y
    for (const auto& row : rows) {
      if (row.readings.angle_1 < kAdcMax) {
        design.push_back({row.inputs.theta1, 1.0, 0.0, row.readings.angle_1 * row.inputs.v_angle_1 / 5.0});
      }
      if (row.readings.angle_2 < kAdcMax) {
        design.push_back({row.inputs.theta2, 0.0, 1.0, row.readings.angle_2 * row.inputs.v_angle_2 / 5.0});
      }
    }
    if (design.empty()) throw Saturated("every angle reading is clamped at 1023");
    const auto m = static_cast<Eigen::Index>(design.size());
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      X.row(k) << design[k][0], design[k][1], design[k][2];
      y(k) = design[k][3];
    }
    const Eigen::VectorXd a = least_squares(X, y, "A/a1/a2");
    p.A = a(0);
    p.a1 = a(1);
    p.a2 = a(2);
    report.angle_rows_used = design.size();
  }

  // Residuals in raw counts.
  double ss1 = 0, ss2 = 0, ss3 = 0, ssc = 0, ssa = 0;
  std::size_t na = 0;
  for (const auto& row : rows) {
    const SensorReadings s = simulate_sensors_unchecked(row.inputs, p, {});
    const auto& r = row.readings;
    ss1 += (s.ir[0] - r.ir[0]) * (s.ir[0] - r.ir[0]) + (s.vis[0] - r.vis[0]) * (s.vis[0] - r.vis[0]);
    ss2 += (s.ir[1] - r.ir[1]) * (s.ir[1] - r.ir[1]) + (s.vis[1] - r.vis[1]) * (s.vis[1] - r.vis[1]);
    ss3 += (s.ir[2] - r.ir[2]) * (s.ir[2] - r.ir[2]) + (s.vis[2] - r.vis[2]) * (s.vis[2] - r.vis[2]);
    ssc += (s.current - r.current) * (s.current - r.current);
    if (r.angle_1 < kAdcMax) {
      ssa += (s.angle_1 - r.angle_1) * (s.angle_1 - r.angle_1);
      ++na;
    }
    if (r.angle_2 < kAdcMax) {
      ssa += (s.angle_2 - r.angle_2) * (s.angle_2 - r.angle_2);
      ++na;
    }
  }
  report.params = p;
  report.residual_rms = {rms(ss1, 2 * rows.size()), rms(ss2, 2 * rows.size()), rms(ss3, 2 * rows.size()),
                         rms(ssc, rows.size()), rms(ssa, na)};
  return report;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json params_to_json(const SensorParams& p) {
  return nlohmann::json{{"S", {p.S[0], p.S[1]}}, {"d1", p.d1}, {"d2", p.d2}, {"d3", p.d3},
                        {"Ts", p.Ts},           {"Tp", p.Tp}, {"Tc", p.Tc}, {"Q", p.Q},
                        {"C0", p.C0},           {"A", p.A},   {"a1", p.a1}, {"a2", p.a2},
                        {"Z1", SensorParams::Z1}, {"Z2", SensorParams::Z2}};
}

SensorParams params_from_json(const nlohmann::json& j) {
  SensorParams p;
  try {
    const auto& s = j.at("S");
    if (s.size() != 2) throw ParamError("S must have 2 rows");
    p.S[0] = s.at(0).get<std::array<double, 3>>();
    p.S[1] = s.at(1).get<std::array<double, 3>>();
    p.d1 = j.at("d1").get<double>();
    p.d2 = j.at("d2").get<double>();
    p.d3 = j.at("d3").get<double>();
    p.Ts = j.at("Ts").get<std::array<double, 3>>();
    p.Tp = j.at("Tp").get<std::array<double, 3>>();
    p.Tc = j.at("Tc").get<std::array<double, 3>>();
    p.Q = j.at("Q").get<std::array<double, 3>>();
    p.C0 = j.at("C0").get<double>();
    p.A = j.at("A").get<double>();
    p.a1 = j.at("a1").get<double>();
    p.a2 = j.at("a2").get<double>();
    if (j.contains("Z1") && j["Z1"].get<double>() != SensorParams::Z1) throw ParamError("Z1 is fixed at 507");
    if (j.contains("Z2") && j["Z2"].get<double>() != SensorParams::Z2) throw ParamError("Z2 is fixed at 512");
  } catch (const nlohmann::json::exception& e) {
    throw ParamError(std::string("malformed parameter document: ") + e.what());
  }
  validate_params(p);
  return p;
}

}  // namespace lt
