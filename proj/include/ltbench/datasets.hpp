#pragma once

// Dataset builders: factor rows from the SCM or the temporal process, rendered
// through the sensor model and an image source.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ltbench/factors.hpp"
#include "ltbench/image.hpp"
#include "ltbench/scm.hpp"
#include "ltbench/sensors.hpp"
#include "ltbench/temporal.hpp"
#include "ltbench/tunnel.hpp"
#include "ltbench/views.hpp"

namespace lt {

/// Fixed sensor settings applied to every generated row.
struct SensorConfig {
  std::array<int, 3> diode_ir = {1, 1, 1};
  std::array<int, 3> diode_vis = {1, 1, 1};
  std::array<int, 3> t_ir = {2, 2, 3};
  std::array<int, 3> t_vis = {2, 2, 3};
  double v_c = 5.0;
  double v_angle_1 = 5.0;
  double v_angle_2 = 5.0;

  /// Tunnel inputs for the given device-unit factors.
  TunnelInputs inputs(const FactorVector& device) const;
};

nlohmann::json sensor_config_to_json(const SensorConfig& c);
SensorConfig sensor_config_from_json(const nlohmann::json& j);

struct DatasetRow {
  TunnelInputs inputs;
  SensorReadings readings;
  /// Ground-truth factors: raw SCM latents, or the device values for the
  /// temporal process.
  FactorVector latent{};
  std::string env;
  std::array<std::uint8_t, kNumFactors> intervention{};
  /// Image file relative to `Dataset::image_root`; empty when images are
  /// rendered on demand.
  std::string image;

  bool operator==(const DatasetRow&) const = default;
};

struct DatasetSplit {
  std::string name;
  std::vector<DatasetRow> rows;
};

enum class DatasetKind { ccrl, multiview, citris, custom };

std::string to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(const std::string& s);

struct Dataset {
  DatasetKind kind = DatasetKind::custom;
  std::uint64_t seed = 0;
  std::vector<DatasetSplit> splits;
  SensorParams params;
  SensorConfig config;
  bool quantize = false;
  bool device_rounding = false;
  /// Generator document (SCM or temporal spec) the rows were built from.
  nlohmann::json spec;
  /// Present for multiview datasets.
  std::optional<ViewSpec> views;
  /// Images are rendered on demand from this source unless rows name files.
  ImageSource images;
  std::filesystem::path image_root;

  const DatasetSplit& split(const std::string& name) const;
  std::size_t total_rows() const;
};

struct GeneratorOptions {
  SensorParams params = example_params();
  SensorConfig config;
  bool quantize = false;
  bool device_rounding = false;
  /// Defaults to the analytic renderer for `params`.
  std::optional<ImageSource> images;
};

/// Observational plus one environment per intervened factor, each with
/// `spec.samples_per_env` rows, split 80/10/10 within every environment.
Dataset build_ccrl_dataset(const ScmSpec& spec, const GeneratorOptions& opts = {});

/// The same pooled rows as the CCRL dataset, split 80/10/10 after a seeded
/// shuffle, with the view grouping attached.
Dataset build_multiview_dataset(const ScmSpec& spec, const ViewSpec& views, const GeneratorOptions& opts = {});

/// Temporal sequence split sequentially into train / val / test, plus an
/// "eval" split of iid-uniform factor rows.
Dataset build_citris_dataset(const TemporalSpec& spec, const GeneratorOptions& opts = {});

/// `n` rows of iid-uniform factors in a single "all" split (kind custom).
Dataset build_uniform_dataset(std::size_t n, std::uint64_t seed, const GeneratorOptions& opts = {});

/// Tunnel rows with sensor readings for device-unit factor values. `latent`,
/// `env` and `intervention` are left for the caller to fill.
std::vector<DatasetRow> render_rows(const std::vector<FactorVector>& device, const GeneratorOptions& opts);

/// Device-unit factor values carried by the inputs.
FactorVector device_factors(const TunnelInputs& x) noexcept;

/// n x 5 matrices of the latent or device factors of a split.
RowMatrix latent_matrix(const DatasetSplit& split);
RowMatrix device_matrix(const DatasetSplit& split);

/// Output variables of one view as a table ("image" is not tabular and is
/// rejected).
RowMatrix view_table(const DatasetSplit& split, const ViewDef& view);

/// Value of a named numeric output column of a row ("ir_1", "current", ...).
double output_value(const DatasetRow& row, const std::string& column);

/// Renders the images of rows [begin, end) of a split.
std::vector<ImageTensor> render_images(const Dataset& ds, const DatasetSplit& split, std::size_t begin,
                                       std::size_t end);

}  // namespace lt
