#pragma once

// Image observations: the neural decoder (R, G, B, theta1, theta2) -> 64x64x3
// image, and an analytic stand-in renderer that gives the decoder a training
// target without the recorded camera corpus.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "json.hpp"
#include "ltbench/dense.hpp"
#include "ltbench/sensors.hpp"
#include "ltbench/tunnel.hpp"

namespace lt {

/// 5 -> hidden -> ... -> hidden -> 64*64*3 with ReLU between layers and an
/// identity output that `decode` clamps to [0, 1].
struct DecoderSpec {
  std::size_t hidden_width = 4096;
  std::size_t hidden_layers = 2;

  std::vector<std::size_t> dims() const;
};

/// Input normalization baked into decoder weights: R, G, B / 255 and theta / 180.
inline constexpr std::array<float, 5> kDecoderInputScale = {1.0f / 255.0f, 1.0f / 255.0f, 1.0f / 255.0f,
                                                            1.0f / 180.0f, 1.0f / 180.0f};

DenseNet make_decoder(const DecoderSpec& spec, std::uint64_t seed);

/// Normalized decoder features of one input row.
std::array<double, 5> decoder_features(const TunnelInputs& x, const DenseNet& net);

ImageTensor decode(const TunnelInputs& inputs, const DenseNet& weights);
std::vector<ImageTensor> decode_batch(std::span<const TunnelInputs> inputs, const DenseNet& weights);

struct AnalyticImageOptions {
  /// Two thin rings around the disk whose brightness follows
  /// cos^2(azimuth - theta_j): a stand-in for the reflections on the two
  /// polarizer frames, which is what makes the angles visible in an image.
  bool frame_rings = true;
};

inline constexpr double kDiskRadius = 24.0;
inline constexpr double kBackgroundLevel = 0.15;
inline constexpr double kRingLevel = 0.6;

/// Centered disk of color min(1, rgb / 255 * malus) on a background of the same
/// color times 0.15.
ImageTensor analytic_image(const TunnelInputs& inputs, const SensorParams& p, const AnalyticImageOptions& opts = {});

struct DecoderTrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-5;
  std::size_t epochs = 100;
  std::size_t batch_size = 4096;
  std::uint64_t seed = 0;
  DecoderSpec spec;
  std::function<void(std::size_t, double)> on_epoch;
};

/// Fits a fresh decoder (initialized from `cfg.seed`) to the image pairs.
TrainResult train_decoder(std::span<const TunnelInputs> inputs, std::span<const ImageTensor> images,
                          const DecoderTrainConfig& cfg);

/// Mean squared pixel error of the clamped decoder output against `images`.
double decoder_pixel_mse(const DenseNet& net, std::span<const TunnelInputs> inputs,
                         std::span<const ImageTensor> images);

/// Flattens images into an n x 12288 float matrix.
RowMatrixF images_to_matrix(std::span<const ImageTensor> images);

/// Where dataset images come from.
class ImageSource {
 public:
  static ImageSource analytic(const SensorParams& p, AnalyticImageOptions opts = {});
  static ImageSource decoder(std::shared_ptr<const DenseNet> net);

  ImageTensor render(const TunnelInputs& x) const;
  std::vector<ImageTensor> render_batch(std::span<const TunnelInputs> xs) const;
  nlohmann::json describe() const;

 private:
  SensorParams params_;
  AnalyticImageOptions opts_;
  std::shared_ptr<const DenseNet> net_;
};

}  // namespace lt
