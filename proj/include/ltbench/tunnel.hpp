#pragma once

// Shared domain types of the light tunnel: inputs, sensor readings, images and
// encoding tables, together with validation and quantization of the inputs.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ltbench/matrix.hpp"

namespace lt {

/// Admissible reference voltages for the current and angle sensors.
inline constexpr std::array<double, 3> kReferenceVoltages = {1.1, 2.56, 5.0};

inline constexpr double kBrightnessMax = 255.0;
inline constexpr double kDeviceAngleMax = 180.0;   // device range [-180, 180]
inline constexpr double kDatasetAngleMax = 90.0;   // dataset convention [-90, 90]

/// Control inputs of the tunnel. Angles are in degrees.
struct TunnelInputs {
  double red = 0.0;
  double green = 0.0;
  double blue = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  std::array<int, 3> diode_ir = {0, 0, 0};   // {0,1,2}
  std::array<int, 3> diode_vis = {0, 0, 0};  // {0,1}
  std::array<int, 3> t_ir = {0, 0, 0};       // {0,1,2,3}
  std::array<int, 3> t_vis = {0, 0, 0};      // {0,1,2,3}
  double v_c = 5.0;
  double v_angle_1 = 5.0;
  double v_angle_2 = 5.0;

  std::array<double, 3> rgb() const noexcept { return {red, green, blue}; }
  bool operator==(const TunnelInputs&) const = default;
};

/// Uncalibrated sensor outputs.
struct SensorReadings {
  std::array<double, 3> ir = {0, 0, 0};
  std::array<double, 3> vis = {0, 0, 0};
  double current = 0.0;
  double angle_1 = 0.0;
  double angle_2 = 0.0;

  bool operator==(const SensorReadings&) const = default;
};

/// 64x64 RGB image, row-major and channel-last, values in [0, 1].
class ImageTensor {
 public:
  static constexpr std::size_t kWidth = 64;
  static constexpr std::size_t kHeight = 64;
  static constexpr std::size_t kChannels = 3;
  static constexpr std::size_t kSize = kWidth * kHeight * kChannels;

  ImageTensor() : pixels_(kSize, 0.0f) {}
  explicit ImageTensor(std::vector<float> pixels);

  float& at(std::size_t y, std::size_t x, std::size_t c) { return pixels_[(y * kWidth + x) * kChannels + c]; }
  float at(std::size_t y, std::size_t x, std::size_t c) const { return pixels_[(y * kWidth + x) * kChannels + c]; }

  const std::vector<float>& pixels() const noexcept { return pixels_; }
  std::vector<float>& pixels() noexcept { return pixels_; }

  bool operator==(const ImageTensor&) const = default;

 private:
  std::vector<float> pixels_;
};

/// Latent codes produced by an external method, row-aligned with a table of
/// ground-truth factors. `group_labels`, when present, names one group per
/// code column (latent-to-factor assignment or content-block membership).
struct EncodingTable {
  std::vector<std::string> columns;
  RowMatrix codes;
  std::vector<std::string> group_labels;
};

/// Throws RangeError naming the first offending field; otherwise returns `raw`.
TunnelInputs validate_inputs(const TunnelInputs& raw);

/// Brightness rounded half away from zero to integers, angles to the nearest
/// 0.1 degree with the same rule. Other fields are untouched.
TunnelInputs quantize_inputs(const TunnelInputs& x);

/// Round half away from zero to a multiple of 0.1.
double round_to_tenth(double v) noexcept;

/// Checks the interchange invariants (n >= 2, finite values, 1:1 alignment with
/// `factor_rows`, one label per column when labels are present).
void validate_encoding(const EncodingTable& enc, std::size_t factor_rows);

bool is_reference_voltage(double v) noexcept;

}  // namespace lt
