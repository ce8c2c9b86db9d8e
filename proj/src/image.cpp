#include "ltbench/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ltbench/errors.hpp"

namespace lt {

std::vector<std::size_t> DecoderSpec::dims() const {
  std::vector<std::size_t> d = {5};
  for (std::size_t i = 0; i < hidden_layers; ++i) d.push_back(hidden_width);
  d.push_back(ImageTensor::kSize);
  return d;
}

DenseNet make_decoder(const DecoderSpec& spec, std::uint64_t seed) {
  if (spec.hidden_width == 0) throw ShapeError("decoder hidden width must be positive");
  const auto dims = spec.dims();
  std::vector<Activation> acts(dims.size() - 1, Activation::relu);
  acts.back() = Activation::identity;
  DenseNet net = make_dense_net(dims, acts, seed);
  net.input_scale.assign(kDecoderInputScale.begin(), kDecoderInputScale.end());
  return net;
}

namespace {

void check_decoder_shape(const DenseNet& net) {
  validate_net(net);
  if (net.input_dim() != 5 || net.output_dim() != ImageTensor::kSize) {
    throw ShapeError("decoder must map 5 inputs to " + std::to_string(ImageTensor::kSize) + " outputs");
  }
  if (!net.input_scale.empty() && net.input_scale.size() != 5) throw ShapeError("decoder input scale needs 5 entries");
}

RowMatrix feature_matrix(std::span<const TunnelInputs> inputs, const DenseNet& net) {
  RowMatrix x(static_cast<Eigen::Index>(inputs.size()), 5);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto f = decoder_features(inputs[i], net);
    for (int k = 0; k < 5; ++k) x(static_cast<Eigen::Index>(i), k) = f[k];
  }
  return x;
}

ImageTensor clamp_row(const RowMatrix& out, Eigen::Index r) {
  std::vector<float> px(ImageTensor::kSize);
  for (std::size_t k = 0; k < px.size(); ++k) {
    px[k] = static_cast<float>(std::clamp(out(r, static_cast<Eigen::Index>(k)), 0.0, 1.0));
  }
  return ImageTensor(std::move(px));
}

}  // namespace

std::array<double, 5> decoder_features(const TunnelInputs& x, const DenseNet& net) {
  const std::array<double, 5> raw = {x.red, x.green, x.blue, x.theta1, x.theta2};
  std::array<double, 5> f{};
  for (int k = 0; k < 5; ++k) {
    const double s = net.input_scale.empty() ? kDecoderInputScale[k] : net.input_scale[k];
    f[k] = raw[k] * s;
  }
  return f;
}

ImageTensor decode(const TunnelInputs& inputs, const DenseNet& weights) {
  return decode_batch(std::span(&inputs, 1), weights).front();
}

std::vector<ImageTensor> decode_batch(std::span<const TunnelInputs> inputs, const DenseNet& weights) {
  check_decoder_shape(weights);
  std::vector<ImageTensor> images;
  images.reserve(inputs.size());
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < inputs.size(); start += kChunk) {
    const auto part = inputs.subspan(start, std::min(kChunk, inputs.size() - start));
    const RowMatrix out = forward(weights, feature_matrix(part, weights));
    for (Eigen::Index r = 0; r < out.rows(); ++r) images.push_back(clamp_row(out, r));
  }
  return images;
}

ImageTensor analytic_image(const TunnelInputs& x, const SensorParams& p, const AnalyticImageOptions& opts) {
  const auto malus = malus_factor(x.theta1, x.theta2, p);
  const auto rgb = x.rgb();
  std::array<double, 3> color{};
  for (int c = 0; c < 3; ++c) color[c] = std::min(1.0, rgb[c] / kBrightnessMax * malus[c]);

  constexpr double center = ImageTensor::kWidth / 2.0;
  ImageTensor img;
  for (std::size_t y = 0; y < ImageTensor::kHeight; ++y) {
    for (std::size_t xp = 0; xp < ImageTensor::kWidth; ++xp) {
      const double dx = static_cast<double>(xp) + 0.5 - center;
      const double dy = center - (static_cast<double>(y) + 0.5);
      const double r = std::hypot(dx, dy);
      double level = kBackgroundLevel;
      if (r <= kDiskRadius) {
        level = 1.0;
      } else if (opts.frame_rings && r >= 26.0 && r < 31.0 && (r < 28.0 || r >= 29.0)) {
        const double azimuth = std::atan2(dy, dx) * (180.0 / std::numbers::pi);
        const double theta = r < 28.0 ? x.theta1 : x.theta2;
        level = kRingLevel * cos_squared_deg(azimuth - theta);
      }
      for (std::size_t c = 0; c < 3; ++c) img.at(y, xp, c) = static_cast<float>(level * color[c]);
    }
  }
  return img;
}

RowMatrixF images_to_matrix(std::span<const ImageTensor> images) {
  RowMatrixF m(static_cast<Eigen::Index>(images.size()), static_cast<Eigen::Index>(ImageTensor::kSize));
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::copy(images[i].pixels().begin(), images[i].pixels().end(), m.row(static_cast<Eigen::Index>(i)).data());
  }
  return m;
}

TrainResult train_decoder(std::span<const TunnelInputs> inputs, std::span<const ImageTensor> images,
                          const DecoderTrainConfig& cfg) {
  if (inputs.size() != images.size()) throw ShapeError("need one image per input row");
  if (inputs.empty()) throw ShapeError("no training pairs");
  DenseNet net = make_decoder(cfg.spec, cfg.seed);
  const RowMatrixF x = feature_matrix(inputs, net).cast<float>();
  const RowMatrixF y = images_to_matrix(images);
  TrainConfig tc;
  tc.lr = cfg.lr;
  tc.weight_decay = cfg.weight_decay;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.seed = cfg.seed;
  tc.on_epoch = cfg.on_epoch;
  return train_mse(std::move(net), x, y, tc);
}

double decoder_pixel_mse(const DenseNet& net, std::span<const TunnelInputs> inputs,
                         std::span<const ImageTensor> images) {
  if (inputs.size() != images.size() || inputs.empty()) throw ShapeError("need one image per input row");
  const auto decoded = decode_batch(inputs, net);
  double total = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& a = decoded[i].pixels();
    const auto& b = images[i].pixels();
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = static_cast<double>(a[k]) - b[k];
      total += d * d;
    }
  }
  return total / static_cast<double>(images.size() * ImageTensor::kSize);
}

ImageSource ImageSource::analytic(const SensorParams& p, AnalyticImageOptions opts) {
  validate_params(p);
  ImageSource s;
  s.params_ = p;
  s.opts_ = opts;
  return s;
}

ImageSource ImageSource::decoder(std::shared_ptr<const DenseNet> net) {
  if (!net) throw ShapeError("null decoder");
  check_decoder_shape(*net);
  ImageSource s;
  s.net_ = std::move(net);
  return s;
}

ImageTensor ImageSource::render(const TunnelInputs& x) const {
  return net_ ? decode(x, *net_) : analytic_image(x, params_, opts_);
}

std::vector<ImageTensor> ImageSource::render_batch(std::span<const TunnelInputs> xs) const {
  if (net_) return decode_batch(xs, *net_);
  std::vector<ImageTensor> out(xs.size());
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = analytic_image(xs[static_cast<std::size_t>(i)], params_, opts_);
  }
  return out;
}

nlohmann::json ImageSource::describe() const {
  if (net_) {
    const auto bytes = save_weights(*net_);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
    return {{"kind", "decoder"}, {"layers", net_->layers.size()}, {"weights_fnv1a", h}};
  }
  return {{"kind", "analytic"}, {"frame_rings", opts_.frame_rings}, {"params", params_to_json(params_)}};
}

}  // namespace lt
