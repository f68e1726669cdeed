#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "navrl/core.hpp"

namespace navrl::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct LayerParams {
  Mat weights;  // out_dim x in_dim
  Vec biases;   // out_dim

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }
};

// Dense feed-forward network: rectified hidden layers, linear output.
// Doubles throughout; value semantics (copying a net copies its weights).
class Mlp {
 public:
  // dims = {input, hidden..., output}, at least one layer. Weights start
  // uniform in +-sqrt(6 / (fan_in + fan_out)), biases at zero.
  Mlp(const std::vector<int>& dims, Rng& rng);

  int input_size() const { return layers_.front().in_dim(); }
  int output_size() const { return layers_.back().out_dim(); }
  std::vector<int> dims() const;

  const std::vector<LayerParams>& layers() const { return layers_; }
  std::vector<LayerParams>& layers() { return layers_; }

  Vec forward(const Vec& input) const;

  // Per-layer activations kept around for backprop. Reusing one instance
  // across calls avoids reallocation in training loops.
  struct Activations {
    std::vector<Mat> pre;   // z_l
    std::vector<Mat> post;  // relu(z_l) on hidden layers, z_L on the output
  };

  // Batched forward; input columns are samples. Returns acts.post.back().
  const Mat& forward_batch(const Mat& inputs, Activations& acts) const;

  bool same_architecture(const Mlp& other) const;

 private:
  explicit Mlp(std::vector<LayerParams> layers) : layers_(std::move(layers)) {}
  friend Mlp deserialize(std::span<const std::uint8_t> bytes);

  std::vector<LayerParams> layers_;
};

// Gradient buffers with the same shapes as the parameters.
struct Gradients {
  std::vector<LayerParams> layers;

  static Gradients zeros_like(const Mlp& net);
  double squared_norm() const;
  void scale(double s);
};

// Gradients of the squared error (td_target - q[action])^2 for one sample.
// Non-finite td_target is rejected.
Gradients backward(const Mlp& net, const Vec& state, int action,
                   double td_target);

// Mean over the batch of per-sample squared errors, gradient flowing only
// through each sample's chosen action. Writes gradients into `out` and
// returns the loss.
double backward_batch(const Mlp& net, const Mat& states,
                      std::span<const int> actions, const Vec& td_targets,
                      Mlp::Activations& acts, Gradients& out);

// Adam with bias correction. Moment buffers mirror the parameter shapes.
class Adam {
 public:
  explicit Adam(const Mlp& net, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  void step(Mlp& net, const Gradients& grads);

  std::int64_t step_count() const { return step_count_; }
  double learning_rate() const { return lr_; }

 private:
  std::vector<LayerParams> m_;  // first moment
  std::vector<LayerParams> v_;  // second moment
  double lr_, beta1_, beta2_, eps_;
  std::int64_t step_count_ = 0;
};

// dst takes src's parameters; architectures must match. Later updates to
// either net leave the other untouched.
void copy_weights(const Mlp& src, Mlp& dst);

enum class CheckpointErrorKind {
  Io,
  BadMagic,
  BadVersion,
  Truncated,
  BadCrc,
  BadShape,
};

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

// Checkpoint payload: magic "QNET", version u16, layer count u16, then per
// layer (in_dim u32, out_dim u32, row-major weights as little-endian f64,
// biases likewise), trailing CRC32 of all preceding bytes.
std::vector<std::uint8_t> serialize(const Mlp& net);
Mlp deserialize(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Mlp& net);
Mlp load_checkpoint(const std::filesystem::path& path);

// The navigation Q-network: 26 inputs, three 256-unit hidden layers, one
// output per action.
inline constexpr int kQInputs = 26;
inline constexpr int kQActions = 5;

Mlp make_q_network(Rng& rng);

}  // namespace navrl::nn
