#pragma once

// Minimal dense multilayer perceptrons: forward pass, backpropagation of the
// mean-squared error, Adam with decoupled weight decay, and a binary weight
// container. Weights are stored as float32; all arithmetic runs in float64.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ltbench/matrix.hpp"

namespace lt {

enum class Activation : std::uint8_t { identity = 0, relu = 1, leaky_relu = 2 };

inline constexpr double kLeakySlope = 0.01;

std::string to_string(Activation a);

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<float> weights;  // in x out, row-major
  std::vector<float> bias;     // out
  Activation activation = Activation::identity;

  bool operator==(const DenseLayer&) const = default;
};

struct DenseNet {
  std::vector<DenseLayer> layers;
  /// Per-input multipliers applied by callers before `forward` (e.g. the image
  /// decoder's normalization). Stored in the weight container so saved models
  /// are self-describing; `forward` itself does not use it.
  std::vector<float> input_scale;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  bool operator==(const DenseNet&) const = default;
};

/// Builds a network with layer widths `dims` (dims.size() - 1 layers) and one
/// activation per layer. Weights are He-uniform (bound sqrt(6 / fan_in)) from
/// a counter-based stream keyed by `seed`; biases start at zero.
DenseNet make_dense_net(std::span<const std::size_t> dims, std::span<const Activation> activations,
                        std::uint64_t seed);

/// Throws ShapeError if consecutive layers do not chain or buffers are sized wrong.
void validate_net(const DenseNet& net);

/// Runs the batch (one sample per row) through the network.
RowMatrix forward(const DenseNet& net, const RowMatrix& batch);

/// Gradients of the loss with respect to every weight and bias, laid out like
/// the layers of the network.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

/// Mean-squared error over all batch entries and its gradient.
double mse_and_gradient(const DenseNet& net, const RowMatrix& inputs, const RowMatrix& targets, Gradients& grad);

struct AdamState {
  double lr = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;

  static AdamState for_net(const DenseNet& net, double lr, double weight_decay);
};

/// One Adam update. Weight decay is decoupled: p <- p - lr * (adam_dir + wd * p).
void adam_step(DenseNet& net, AdamState& state, const Gradients& grad);

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  /// Called after each epoch with (epoch index, mean training loss).
  std::function<void(std::size_t, double)> on_epoch;
};

struct TrainResult {
  DenseNet net;
  std::vector<double> loss_history;  // mean training loss per epoch
};

/// Mini-batch Adam on the mean-squared error. Shuffling depends only on
/// `cfg.seed`. Throws NonFinite if the loss diverges.
TrainResult train_mse(DenseNet net, const RowMatrixF& inputs, const RowMatrixF& targets, const TrainConfig& cfg);

/// Forward pass over a float dataset in chunks; returns float64 predictions.
RowMatrix predict(const DenseNet& net, const RowMatrixF& inputs, std::size_t chunk = 512);

/// Little-endian container: magic "LTNN", version, input scale, then per layer
/// (in, out, activation, row-major float32 weights, float32 bias), and a
/// trailing FNV-1a 64 checksum of everything before it.
std::vector<std::uint8_t> save_weights(const DenseNet& net);
DenseNet load_weights(std::span<const std::uint8_t> bytes);

void save_weights_file(const DenseNet& net, const std::string& path);
DenseNet load_weights_file(const std::string& path);

}  // namespace lt
