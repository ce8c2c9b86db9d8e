#include "ltbench/tunnel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ltbench/errors.hpp"

namespace lt {

ImageTensor::ImageTensor(std::vector<float> pixels) : pixels_(std::move(pixels)) {
  if (pixels_.size() != kSize) {
    throw ShapeError("image needs " + std::to_string(kSize) + " values, got " +
                     std::to_string(pixels_.size()));
  }
}

bool is_reference_voltage(double v) noexcept {
  return std::find(kReferenceVoltages.begin(), kReferenceVoltages.end(), v) != kReferenceVoltages.end();
}

namespace {

void check_real(const char* name, double v, double lo, double hi) {
  if (!(v >= lo && v <= hi)) {
    std::ostringstream os;
    os << v << " outside [" << lo << ", " << hi << "]";
    throw RangeError(name, os.str());
  }
}

void check_codes(const char* name, const std::array<int, 3>& codes, int hi) {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] < 0 || codes[i] > hi) {
      throw RangeError(std::string(name) + "_" + std::to_string(i + 1),
                       std::to_string(codes[i]) + " outside {0.." + std::to_string(hi) + "}");
    }
  }
}

void check_voltage(const char* name, double v) {
  if (!is_reference_voltage(v)) {
    std::ostringstream os;
    os << v << " not in {1.1, 2.56, 5}";
    throw RangeError(name, os.str());
  }
}

}  // namespace

TunnelInputs validate_inputs(const TunnelInputs& raw) {
  check_real("R", raw.red, 0.0, kBrightnessMax);
  check_real("G", raw.green, 0.0, kBrightnessMax);
  check_real("B", raw.blue, 0.0, kBrightnessMax);
  check_real("theta1", raw.theta1, -kDeviceAngleMax, kDeviceAngleMax);
  check_real("theta2", raw.theta2, -kDeviceAngleMax, kDeviceAngleMax);
  check_codes("diode_ir", raw.diode_ir, 2);
  check_codes("diode_vis", raw.diode_vis, 1);
  check_codes("t_ir", raw.t_ir, 3);
  check_codes("t_vis", raw.t_vis, 3);
  check_voltage("v_c", raw.v_c);
  check_voltage("v_angle_1", raw.v_angle_1);
  check_voltage("v_angle_2", raw.v_angle_2);
  return raw;
}

double round_to_tenth(double v) noexcept {
  // Dividing (rather than multiplying by 0.1) makes the grid values fixed points.
  return std::round(v * 10.0) / 10.0;
}

TunnelInputs quantize_inputs(const TunnelInputs& x) {
  TunnelInputs q = x;
  q.red = std::round(x.red);
  q.green = std::round(x.green);
  q.blue = std::round(x.blue);
  q.theta1 = round_to_tenth(x.theta1);
  q.theta2 = round_to_tenth(x.theta2);
  return q;
}

void validate_encoding(const EncodingTable& enc, std::size_t factor_rows) {
  const auto n = static_cast<std::size_t>(enc.codes.rows());
  if (n < 2) throw ShapeError("encoding table needs at least 2 rows");
  if (n != factor_rows) {
    throw ShapeError("encoding rows (" + std::to_string(n) + ") do not match factor rows (" +
                     std::to_string(factor_rows) + ")");
  }
  if (!enc.columns.empty() && enc.columns.size() != static_cast<std::size_t>(enc.codes.cols())) {
    throw ShapeError("column names do not match code width");
  }
  if (!enc.group_labels.empty() && enc.group_labels.size() != static_cast<std::size_t>(enc.codes.cols())) {
    throw ShapeError("one group label per code column required");
  }
  if (!enc.codes.allFinite()) throw ShapeError("encoding table contains missing or non-finite values");
}

}  // namespace lt
