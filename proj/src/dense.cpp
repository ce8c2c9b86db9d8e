#include "ltbench/dense.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "ltbench/errors.hpp"
#include "ltbench/kernels.hpp"
#include "ltbench/rng.hpp"

namespace lt {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
  }
  return "unknown";
}

std::size_t DenseNet::input_dim() const { return layers.empty() ? 0 : layers.front().in; }
std::size_t DenseNet::output_dim() const { return layers.empty() ? 0 : layers.back().out; }

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void validate_net(const DenseNet& net) {
  if (net.layers.empty()) throw ShapeError("network has no layers");
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.in == 0 || l.out == 0) throw ShapeError("layer " + std::to_string(i) + " has a zero dimension");
    if (l.weights.size() != l.in * l.out || l.bias.size() != l.out) {
      throw ShapeError("layer " + std::to_string(i) + " buffers do not match its dimensions");
    }
    if (i > 0 && net.layers[i - 1].out != l.in) {
      throw ShapeError("layer " + std::to_string(i) + " input " + std::to_string(l.in) +
                       " does not chain with previous output " + std::to_string(net.layers[i - 1].out));
    }
    if (static_cast<std::uint8_t>(l.activation) > 2) throw ShapeError("invalid activation tag");
  }
}

DenseNet make_dense_net(std::span<const std::size_t> dims, std::span<const Activation> activations,
                        std::uint64_t seed) {
  if (dims.size() < 2 || activations.size() != dims.size() - 1) {
    throw ShapeError("need at least two widths and one activation per layer");
  }
  DenseNet net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.activation = activations[l];
    layer.weights.resize(layer.in * layer.out);
    layer.bias.assign(layer.out, 0.0f);
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in));
    CounterRng rng(seed, streams::kInit, l);
    for (auto& w : layer.weights) w = static_cast<float>(rng.uniform(-bound, bound));
    net.layers.push_back(std::move(layer));
  }
  validate_net(net);
  return net;
}

namespace {

RowMatrix weights_as_double(const DenseLayer& l) {
  RowMatrix w(l.in, l.out);
  std::copy(l.weights.begin(), l.weights.end(), w.data());
  return w;
}

RowMatrix weights_transposed(const DenseLayer& l) {
  RowMatrix wt(l.out, l.in);
  for (std::size_t i = 0; i < l.in; ++i)
    for (std::size_t o = 0; o < l.out; ++o) wt(o, i) = l.weights[i * l.out + o];
  return wt;
}

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::leaky_relu: return z > 0.0 ? z : kLeakySlope * z;
    case Activation::identity: break;
  }
  return z;
}

inline double derivative(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::leaky_relu: return z > 0.0 ? 1.0 : kLeakySlope;
    case Activation::identity: break;
  }
  return 1.0;
}

/// z = h W + b; returns z (pre-activation) and writes activated values to `out`.
void affine(const DenseLayer& l, const RowMatrix& h, RowMatrix& z) {
  const RowMatrix w = weights_as_double(l);
  z.resize(h.rows(), static_cast<Eigen::Index>(l.out));
  kernels::parallel::gemm_nn(kernels::view(h), kernels::view(w), kernels::view(z));
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    for (std::size_t o = 0; o < l.out; ++o) z(r, static_cast<Eigen::Index>(o)) += l.bias[o];
}

void apply_activation(Activation a, const RowMatrix& z, RowMatrix& h) {
  h.resize(z.rows(), z.cols());
  const auto n = z.size();
  const double* zs = z.data();
  double* hs = h.data();
  for (Eigen::Index i = 0; i < n; ++i) hs[i] = activate(a, zs[i]);
}

}  // namespace

RowMatrix forward(const DenseNet& net, const RowMatrix& batch) {
  validate_net(net);
  if (static_cast<std::size_t>(batch.cols()) != net.input_dim()) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                     std::to_string(net.input_dim()));
  }
  RowMatrix h = batch;
  RowMatrix z;
  for (const auto& l : net.layers) {
    affine(l, h, z);
    apply_activation(l.activation, z, h);
  }
  return h;
}

double mse_and_gradient(const DenseNet& net, const RowMatrix& inputs, const RowMatrix& targets, Gradients& grad) {
  validate_net(net);
  if (static_cast<std::size_t>(inputs.cols()) != net.input_dim() ||
      static_cast<std::size_t>(targets.cols()) != net.output_dim() || inputs.rows() != targets.rows() ||
      inputs.rows() == 0) {
    throw ShapeError("inputs/targets do not match the network");
  }
  const std::size_t L = net.layers.size();
  std::vector<RowMatrix> acts(L + 1), pre(L);
  acts[0] = inputs;
  for (std::size_t l = 0; l < L; ++l) {
    affine(net.layers[l], acts[l], pre[l]);
    apply_activation(net.layers[l].activation, pre[l], acts[l + 1]);
  }

  const double count = static_cast<double>(targets.size());
  RowMatrix delta = acts[L] - targets;
  const double loss = delta.squaredNorm() / count;
  delta *= 2.0 / count;

  grad.weights.resize(L);
  grad.bias.resize(L);
  for (std::size_t li = L; li-- > 0;) {
    const auto& layer = net.layers[li];
    {
      const auto n = delta.size();
      double* d = delta.data();
      const double* z = pre[li].data();
      for (Eigen::Index i = 0; i < n; ++i) d[i] *= derivative(layer.activation, z[i]);
    }
    RowMatrix dw(layer.in, layer.out);
    kernels::parallel::gemm_tn(kernels::view(acts[li]), kernels::view(delta), kernels::view(dw));
    grad.weights[li].assign(dw.data(), dw.data() + dw.size());

    auto& db = grad.bias[li];
    db.assign(layer.out, 0.0);
    for (Eigen::Index r = 0; r < delta.rows(); ++r)
      for (std::size_t o = 0; o < layer.out; ++o) db[o] += delta(r, static_cast<Eigen::Index>(o));

    if (li > 0) {
      const RowMatrix wt = weights_transposed(layer);
      RowMatrix prev(delta.rows(), static_cast<Eigen::Index>(layer.in));
      kernels::parallel::gemm_nn(kernels::view(delta), kernels::view(wt), kernels::view(prev));
      delta = std::move(prev);
    }
  }
  return loss;
}

AdamState AdamState::for_net(const DenseNet& net, double lr, double weight_decay) {
  AdamState s;
  s.lr = lr;
  s.weight_decay = weight_decay;
  for (const auto& l : net.layers) {
    s.m_w.emplace_back(l.weights.size(), 0.0);
    s.v_w.emplace_back(l.weights.size(), 0.0);
    s.m_b.emplace_back(l.bias.size(), 0.0);
    s.v_b.emplace_back(l.bias.size(), 0.0);
  }
  return s;
}

namespace {

void adam_update(std::vector<float>& params, std::vector<double>& m, std::vector<double>& v,
                 const std::vector<double>& g, const AdamState& s, double c1, double c2) {
  if (m.size() != params.size() || g.size() != params.size()) throw ShapeError("Adam state does not match network");
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    const double p = params[i];
    params[i] = static_cast<float>(p - s.lr * (mhat / (std::sqrt(vhat) + s.eps)) - s.lr * s.weight_decay * p);
  }
}

}  // namespace

void adam_step(DenseNet& net, AdamState& state, const Gradients& grad) {
  if (grad.weights.size() != net.layers.size() || state.m_w.size() != net.layers.size()) {
    throw ShapeError("gradient does not match network");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    adam_update(net.layers[l].weights, state.m_w[l], state.v_w[l], grad.weights[l], state, c1, c2);
    adam_update(net.layers[l].bias, state.m_b[l], state.v_b[l], grad.bias[l], state, c1, c2);
  }
}

namespace {

RowMatrix gather_rows(const RowMatrixF& src, std::span<const std::size_t> idx) {
  RowMatrix out(static_cast<Eigen::Index>(idx.size()), src.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = src.row(static_cast<Eigen::Index>(idx[r])).cast<double>();
  }
  return out;
}

}  // namespace

TrainResult train_mse(DenseNet net, const RowMatrixF& inputs, const RowMatrixF& targets, const TrainConfig& cfg) {
  validate_net(net);
  if (static_cast<std::size_t>(inputs.cols()) != net.input_dim() ||
      static_cast<std::size_t>(targets.cols()) != net.output_dim()) {
    throw ShapeError("training data does not match the network dimensions");
  }
  if (inputs.rows() != targets.rows() || inputs.rows() == 0) throw ShapeError("inputs and targets need equal, nonzero rows");
  if (cfg.batch_size == 0) throw ShapeError("batch size must be positive");
  if (!(cfg.lr >= 0.0) || !(cfg.weight_decay >= 0.0)) throw ShapeError("learning rate and weight decay must be nonnegative");

  const auto n = static_cast<std::size_t>(inputs.rows());
  std::vector<std::size_t> order(n);
  AdamState adam = AdamState::for_net(net, cfg.lr, cfg.weight_decay);
  Gradients grad;
  TrainResult result;
  result.loss_history.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng rng(cfg.seed, streams::kShuffle, epoch);
    shuffle(order, rng);

    double total = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const RowMatrix xb = gather_rows(inputs, idx);
      const RowMatrix yb = gather_rows(targets, idx);
      const double loss = mse_and_gradient(net, xb, yb, grad);
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "loss became " << loss << " at epoch " << epoch << ", batch starting at row " << start
           << " (lr=" << cfg.lr << ", batch_size=" << cfg.batch_size << ")";
        throw NonFinite(os.str());
      }
      adam_step(net, adam, grad);
      total += loss * static_cast<double>(idx.size());
    }
    const double mean = total / static_cast<double>(n);
    result.loss_history.push_back(mean);
    if (cfg.on_epoch) cfg.on_epoch(epoch, mean);
  }
  result.net = std::move(net);
  return result;
}

RowMatrix predict(const DenseNet& net, const RowMatrixF& inputs, std::size_t chunk) {
  RowMatrix out(inputs.rows(), static_cast<Eigen::Index>(net.output_dim()));
  for (Eigen::Index start = 0; start < inputs.rows(); start += static_cast<Eigen::Index>(chunk)) {
    const Eigen::Index len = std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk), inputs.rows() - start);
    const RowMatrix x = inputs.middleRows(start, len).cast<double>();
    out.middleRows(start, len) = forward(net, x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weight container

namespace {

constexpr std::uint32_t kFormatVersion = 1;
constexpr char kMagic[4] = {'L', 'T', 'N', 'N'};

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw FormatError("weight container is truncated");
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_weights(const DenseNet& net) {
  validate_net(net);
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(net.input_scale.size()));
  for (float s : net.input_scale) w.f32(s);
  w.u32(static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    w.u32(static_cast<std::uint32_t>(l.in));
    w.u32(static_cast<std::uint32_t>(l.out));
    w.u8(static_cast<std::uint8_t>(l.activation));
    for (float v : l.weights) w.f32(v);
    for (float v : l.bias) w.f32(v);
  }
  const std::uint64_t sum = fnv1a(w.bytes());
  w.u64(sum);
  return std::move(w.bytes());
}

DenseNet load_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 4 + 8) throw FormatError("weight container is truncated");
  for (int i = 0; i < 4; ++i) {
    if (bytes[i] != static_cast<std::uint8_t>(kMagic[i])) throw FormatError("bad magic tag");
  }
  Reader r(bytes.subspan(4));
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) throw FormatError("unsupported container version " + std::to_string(version));

  DenseNet net;
  const std::uint32_t n_scale = r.u32();
  if (n_scale > r.remaining() / 4) throw FormatError("weight container is truncated");
  for (std::uint32_t i = 0; i < n_scale; ++i) net.input_scale.push_back(r.f32());
  const std::uint32_t n_layers = r.u32();
  for (std::uint32_t li = 0; li < n_layers; ++li) {
    DenseLayer l;
    l.in = r.u32();
    l.out = r.u32();
    const std::uint8_t act = r.u8();
    if (act > 2) throw FormatError("unknown activation tag " + std::to_string(act));
    l.activation = static_cast<Activation>(act);
    const std::uint64_t count = static_cast<std::uint64_t>(l.in) * l.out + l.out;
    if (count > r.remaining() / 4) throw FormatError("weight container is truncated");
    l.weights.resize(l.in * l.out);
    for (auto& v : l.weights) v = r.f32();
    l.bias.resize(l.out);
    for (auto& v : l.bias) v = r.f32();
    net.layers.push_back(std::move(l));
  }
  const std::size_t body = bytes.size() - r.remaining();
  const std::uint64_t stored = r.u64();
  if (r.remaining() != 0) throw FormatError("trailing bytes after checksum");
  if (stored != fnv1a(bytes.first(body))) throw FormatError("checksum mismatch");
  try {
    validate_net(net);
  } catch (const ShapeError& e) {
    throw FormatError(e.what());
  }
  return net;
}

void save_weights_file(const DenseNet& net, const std::string& path) {
  const auto bytes = save_weights(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

DenseNet load_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_weights(bytes);
}

}  // namespace lt
