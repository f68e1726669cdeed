#include "navrl/nn.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace navrl::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

Mlp::Mlp(const std::vector<int>& dims, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least one layer");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("Mlp: non-positive layer dimension");
  layers_.reserve(dims.size() - 1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    LayerParams p;
    p.weights.resize(out, in);
    const double limit = std::sqrt(6.0 / (in + out));
    for (int c = 0; c < in; ++c)
      for (int r = 0; r < out; ++r) p.weights(r, c) = rng.uniform(-limit, limit);
    p.biases = Vec::Zero(out);
    layers_.push_back(std::move(p));
  }
}

std::vector<int> Mlp::dims() const {
  std::vector<int> d;
  d.reserve(layers_.size() + 1);
  d.push_back(layers_.front().in_dim());
  for (const auto& l : layers_) d.push_back(l.out_dim());
  return d;
}

Vec Mlp::forward(const Vec& input) const {
  if (input.size() != input_size())
    throw std::logic_error("Mlp::forward: input dimension mismatch");
  Vec a = input;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l)
    a = (layers_[l].weights * a + layers_[l].biases).cwiseMax(0.0);
  return layers_.back().weights * a + layers_.back().biases;
}

const Mat& Mlp::forward_batch(const Mat& inputs, Activations& acts) const {
  if (inputs.rows() != input_size())
    throw std::logic_error("Mlp::forward_batch: input dimension mismatch");
  const std::size_t count = layers_.size();
  acts.pre.resize(count);
  acts.post.resize(count);
  const Mat* a = &inputs;
  for (std::size_t l = 0; l < count; ++l) {
    Mat& z = acts.pre[l];
    z.noalias() = layers_[l].weights * (*a);
    z.colwise() += layers_[l].biases;
    if (l + 1 < count)
      acts.post[l] = z.cwiseMax(0.0);
    else
      acts.post[l] = z;
    a = &acts.post[l];
  }
  return acts.post.back();
}

bool Mlp::same_architecture(const Mlp& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l)
    if (layers_[l].in_dim() != other.layers_[l].in_dim() ||
        layers_[l].out_dim() != other.layers_[l].out_dim())
      return false;
  return true;
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  g.layers.reserve(net.layers().size());
  for (const auto& l : net.layers())
    g.layers.push_back({Mat::Zero(l.out_dim(), l.in_dim()), Vec::Zero(l.out_dim())});
  return g;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weights.squaredNorm() + l.biases.squaredNorm();
  return s;
}

void Gradients::scale(double s) {
  for (auto& l : layers) {
    l.weights *= s;
    l.biases *= s;
  }
}

Gradients backward(const Mlp& net, const Vec& state, int action,
                   double td_target) {
  Mlp::Activations acts;
  Gradients grads = Gradients::zeros_like(net);
  Vec targets(1);
  targets[0] = td_target;
  backward_batch(net, state, std::span<const int>(&action, 1), targets, acts,
                 grads);
  return grads;
}

double backward_batch(const Mlp& net, const Mat& states,
                      std::span<const int> actions, const Vec& td_targets,
                      Mlp::Activations& acts, Gradients& out) {
  const auto batch = static_cast<Eigen::Index>(actions.size());
  if (batch == 0) throw std::invalid_argument("backward_batch: empty batch");
  if (states.cols() != batch || td_targets.size() != batch)
    throw std::logic_error("backward_batch: batch size mismatch");
  if (!td_targets.allFinite())
    throw std::invalid_argument("backward_batch: non-finite td target");

  const auto& layers = net.layers();
  const Mat& q = net.forward_batch(states, acts);
  if (out.layers.size() != layers.size()) out = Gradients::zeros_like(net);

  // d(mean squared error)/dz at the output, nonzero only at chosen actions.
  Mat delta = Mat::Zero(q.rows(), batch);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int a = actions[i];
    if (a < 0 || a >= q.rows())
      throw std::logic_error("backward_batch: action index out of range");
    const double residual = q(a, i) - td_targets[i];
    loss += residual * residual;
    delta(a, i) = 2.0 * residual / static_cast<double>(batch);
  }
  loss /= static_cast<double>(batch);

  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const Mat& a_prev = (l == 0) ? states : acts.post[l - 1];
    out.layers[l].weights.noalias() = delta * a_prev.transpose();
    out.layers[l].biases = delta.rowwise().sum();
    if (l > 0) {
      Mat back;
      back.noalias() = layers[l].weights.transpose() * delta;
      // relu': 1 where the pre-activation was positive, 0 otherwise
      delta = (acts.pre[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return loss;
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (const auto& l : net.layers()) {
    m_.push_back({Mat::Zero(l.out_dim(), l.in_dim()), Vec::Zero(l.out_dim())});
    v_.push_back({Mat::Zero(l.out_dim(), l.in_dim()), Vec::Zero(l.out_dim())});
  }
}

void Adam::step(Mlp& net, const Gradients& grads) {
  auto& layers = net.layers();
  if (grads.layers.size() != layers.size() || m_.size() != layers.size())
    throw std::logic_error("Adam::step: layer count mismatch");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Mat& gw = grads.layers[l].weights;
    const Vec& gb = grads.layers[l].biases;
    if (gw.rows() != layers[l].weights.rows() ||
        gw.cols() != layers[l].weights.cols() ||
        gb.size() != layers[l].biases.size())
      throw std::logic_error("Adam::step: gradient shape mismatch");

    m_[l].weights = beta1_ * m_[l].weights + (1.0 - beta1_) * gw;
    v_[l].weights.array() =
        beta2_ * v_[l].weights.array() + (1.0 - beta2_) * gw.array().square();
    layers[l].weights.array() -=
        lr_ * (m_[l].weights.array() / bc1) /
        ((v_[l].weights.array() / bc2).sqrt() + eps_);

    m_[l].biases = beta1_ * m_[l].biases + (1.0 - beta1_) * gb;
    v_[l].biases.array() =
        beta2_ * v_[l].biases.array() + (1.0 - beta2_) * gb.array().square();
    layers[l].biases.array() -= lr_ * (m_[l].biases.array() / bc1) /
                                ((v_[l].biases.array() / bc2).sqrt() + eps_);
  }
}

void copy_weights(const Mlp& src, Mlp& dst) {
  if (!src.same_architecture(dst))
    throw std::logic_error("copy_weights: architecture mismatch");
  for (std::size_t l = 0; l < src.layers().size(); ++l) {
    dst.layers()[l].weights = src.layers()[l].weights;
    dst.layers()[l].biases = src.layers()[l].biases;
  }
}

namespace {

constexpr char kMagic[4] = {'Q', 'N', 'E', 'T'};
constexpr std::uint16_t kFormatVersion = 1;
constexpr std::uint32_t kMaxLayerCount = 64;
constexpr std::uint32_t kMaxDim = 1u << 20;

void append_bytes(std::vector<std::uint8_t>& buf, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  buf.insert(buf.end(), b, b + n);
}

template <typename T>
void append_le(std::vector<std::uint8_t>& buf, T value) {
  append_bytes(buf, &value, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T read_le() {
    if (pos_ + sizeof(T) > bytes_.size())
      throw CheckpointError(CheckpointErrorKind::Truncated,
                            "checkpoint: truncated payload");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void read_doubles(double* dst, std::size_t n) {
    const std::size_t len = n * sizeof(double);
    if (pos_ + len > bytes_.size())
      throw CheckpointError(CheckpointErrorKind::Truncated,
                            "checkpoint: truncated payload");
    std::memcpy(dst, bytes_.data() + pos_, len);
    pos_ += len;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const Mlp& net) {
  std::vector<std::uint8_t> buf;
  append_bytes(buf, kMagic, sizeof(kMagic));
  append_le<std::uint16_t>(buf, kFormatVersion);
  append_le<std::uint16_t>(buf, static_cast<std::uint16_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(l.in_dim()));
    append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(l.out_dim()));
    for (int r = 0; r < l.out_dim(); ++r)
      for (int c = 0; c < l.in_dim(); ++c) append_le<double>(buf, l.weights(r, c));
    for (int r = 0; r < l.out_dim(); ++r) append_le<double>(buf, l.biases[r]);
  }
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
  append_le<std::uint32_t>(buf, crc);
  return buf;
}

Mlp deserialize(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  char magic[4];
  for (char& ch : magic) ch = static_cast<char>(in.read_le<std::uint8_t>());
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointError(CheckpointErrorKind::BadMagic,
                          "checkpoint: bad format (magic mismatch)");
  const auto version = in.read_le<std::uint16_t>();
  if (version != kFormatVersion)
    throw CheckpointError(CheckpointErrorKind::BadVersion,
                          "checkpoint: unsupported format version " +
                              std::to_string(version));
  const auto layer_count = in.read_le<std::uint16_t>();
  if (layer_count == 0 || layer_count > kMaxLayerCount)
    throw CheckpointError(CheckpointErrorKind::BadShape,
                          "checkpoint: implausible layer count");

  std::vector<LayerParams> layers;
  layers.reserve(layer_count);
  for (int l = 0; l < layer_count; ++l) {
    const auto in_dim = in.read_le<std::uint32_t>();
    const auto out_dim = in.read_le<std::uint32_t>();
    if (in_dim == 0 || out_dim == 0 || in_dim > kMaxDim || out_dim > kMaxDim)
      throw CheckpointError(CheckpointErrorKind::BadShape,
                            "checkpoint: implausible layer dimensions");
    LayerParams p;
    p.weights.resize(out_dim, in_dim);
    for (std::uint32_t r = 0; r < out_dim; ++r) {
      std::vector<double> row(in_dim);
      in.read_doubles(row.data(), in_dim);
      for (std::uint32_t c = 0; c < in_dim; ++c) p.weights(r, c) = row[c];
    }
    p.biases.resize(out_dim);
    in.read_doubles(p.biases.data(), out_dim);
    layers.push_back(std::move(p));
  }

  if (in.remaining() != sizeof(std::uint32_t))
    throw CheckpointError(CheckpointErrorKind::Truncated,
                          "checkpoint: payload length mismatch");
  const std::size_t body_len = in.pos();
  const auto stored_crc = in.read_le<std::uint32_t>();
  const auto computed_crc = static_cast<std::uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(body_len)));
  if (stored_crc != computed_crc)
    throw CheckpointError(CheckpointErrorKind::BadCrc,
                          "checkpoint: CRC mismatch");

  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    if (layers[l].out_dim() != layers[l + 1].in_dim())
      throw CheckpointError(CheckpointErrorKind::BadShape,
                            "checkpoint: layer dimensions do not chain");
  return Mlp(std::move(layers));
}

void save_checkpoint(const std::filesystem::path& path, const Mlp& net) {
  const auto bytes = serialize(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw CheckpointError(CheckpointErrorKind::Io,
                          "checkpoint: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw CheckpointError(CheckpointErrorKind::Io,
                          "checkpoint: write failed for " + path.string());
}

Mlp load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in)
    throw CheckpointError(CheckpointErrorKind::Io,
                          "checkpoint: cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(size));
  if (!in)
    throw CheckpointError(CheckpointErrorKind::Io,
                          "checkpoint: read failed for " + path.string());
  return deserialize(bytes);
}

Mlp make_q_network(Rng& rng) {
  return Mlp({kQInputs, 256, 256, 256, kQActions}, rng);
}

}  // namespace navrl::nn
