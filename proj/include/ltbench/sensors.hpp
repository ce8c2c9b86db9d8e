#pragma once

// Mechanistic model of the tunnel's numeric sensors: three two-channel light
// sensors (infrared / visible), the light-source current sensor and the two
// polarizer angle sensors. Includes the calibration conversions and a
// least-squares fit of the model parameters from calibration data.

#include <array>
#include <span>
#include <vector>

#include "json.hpp"
#include "ltbench/tunnel.hpp"

namespace lt {

/// Parameters of the sensor model. Field names match the JSON document.
struct SensorParams {
  /// Row 0: response of the smallest IR photodiode to (R, G, B); row 1: visible.
  std::array<std::array<double, 3>, 2> S = {};
  /// Distances (mm) from the light source to light sensors 1, 2 and 3.
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  /// Per-color transmission of the first polarizer.
  std::array<double, 3> Ts = {};
  /// Joint transmission of both polarizers with parallel / crossed axes.
  std::array<double, 3> Tp = {};
  std::array<double, 3> Tc = {};
  /// Current response to (R, G, B) and the base current, both at R_C = 5 V.
  std::array<double, 3> Q = {};
  double C0 = 0.0;
  /// Angle-sensor slope (counts per degree) and zero points at 5 V.
  double A = 0.0;
  double a1 = 0.0, a2 = 0.0;

  static constexpr double Z1 = 507.0;
  static constexpr double Z2 = 512.0;

  bool operator==(const SensorParams&) const = default;
};

/// A documented, plausible-magnitude parameter set. It is NOT calibrated
/// against the physical device; obtain real values with `fit_params`.
SensorParams example_params();

/// Throws ParamError if any invariant of `p` is violated.
void validate_params(const SensorParams& p);

struct SimulateOptions {
  /// Round to integers and clip to the device ranges ({0..65535} for the light
  /// sensors, [0, 1023] for current and angles). Clipping happens after gain.
  bool device_rounding = false;
};

/// Evaluates the sensor model for one input row. Pure and deterministic.
SensorReadings simulate_sensors(const TunnelInputs& x, const SensorParams& p,
                                const SimulateOptions& opts = {});

/// Same as `simulate_sensors` but skips parameter validation; used by the
/// batch kernels after validating once.
SensorReadings simulate_sensors_unchecked(const TunnelInputs& x, const SensorParams& p,
                                          const SimulateOptions& opts) noexcept;

/// Malus transmission factor (Tp - Tc) cos^2(theta1 - theta2) + Tc per color.
std::array<double, 3> malus_factor(double theta1_deg, double theta2_deg, const SensorParams& p) noexcept;

/// cos^2 of an angle difference in degrees, exact at multiples of 90 degrees.
double cos_squared_deg(double delta_deg) noexcept;

/// Raw current count to amperes.
double calibrate_current(double raw, double v_c);

/// Raw angle count of sensor `j` (1 or 2) to degrees.
double calibrate_angle(double raw, int j, double v_angle);

struct CalibrationRow {
  TunnelInputs inputs;
  SensorReadings readings;
};

struct FitOptions {
  /// Distances are not identifiable from readings; they are held fixed and the
  /// transmissions absorb the fit.
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
  static FitOptions from(const SensorParams& p) { return {p.d1, p.d2, p.d3}; }
};

/// Root-mean-square residual per sensor, in uncalibrated counts.
struct FitResiduals {
  double sensor1 = 0.0;
  double sensor2 = 0.0;
  double sensor3 = 0.0;
  double current = 0.0;
  double angle = 0.0;
};

struct FitReport {
  SensorParams params;
  FitResiduals residual_rms;
  std::size_t angle_rows_used = 0;
};

/// Least-squares estimate of the sensor parameters. Throws RankDeficient when a
/// design matrix is singular and Saturated when every angle reading is clamped.
FitReport fit_params(std::span<const CalibrationRow> calibration, const FitOptions& opts);

nlohmann::json params_to_json(const SensorParams& p);
SensorParams params_from_json(const nlohmann::json& j);

}  // namespace lt
