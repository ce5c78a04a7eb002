#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dbn/image.hpp"
#include "dbn/matrix.hpp"
#include "dbn/nnet/layers.hpp"

namespace dbn::nnet {

struct NetConfig {
  std::size_t input_size = 32;     ///< square input side
  std::size_t input_channels = 3;  ///< gray stacked to RGB
  std::size_t classes = 4;
  std::size_t width = 12;          ///< channels inside each branch
  std::size_t kernel = 3;
  double dropout_rate = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Top-level layer of the network, as listed in checkpoints.
struct LayerEntry {
  std::string section;  ///< "branch_a", "branch_b" or "head"
  LayerSpec spec;
};

/// Two parallel branches over the same input, fused by concatenating their
/// pooled features:
///
///   branch_a: conv KxK stride 2 -> relu -> residual_block x2 -> global_avg_pool
///   branch_b: ds_block stride 2 -> ds_block                 -> global_avg_pool
///   head:     concat -> dropout -> dense(K) -> softmax
///
/// Parameters are Kaiming-normal (biases zero) drawn from Rng(config.seed).
class Network {
 public:
  explicit Network(const NetConfig& config);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  const NetConfig& config() const { return config_; }
  Shape input_shape(std::size_t batch) const;

  /// Pre-softmax scores, (N, K, 1, 1).
  Tensor4 logits(const Tensor4& x, Mode mode);
  /// Class probabilities, (N, K, 1, 1).
  Tensor4 forward(const Tensor4& x, Mode mode);

  /// Mean softmax cross-entropy over the batch; accumulates parameter
  /// gradients of that mean (call zero_grad() first).
  double loss_and_backward(const Tensor4& x, const std::vector<std::size_t>& labels, Mode mode);
  /// Mean cross-entropy without touching gradients.
  double loss(const Tensor4& x, const std::vector<std::size_t>& labels, Mode mode);

  /// Backprop of an arbitrary upstream gradient on the probabilities through
  /// the full graph including the softmax layer. Returns dL/d(input).
  Tensor4 backward_from_probabilities(const Tensor4& grad_probs);

  void zero_grad();
  /// All parameters in declaration order (branch_a, branch_b, head).
  std::vector<Param*> parameters();
  /// Parameters of the classifier head only.
  std::vector<Param*> head_parameters();
  std::size_t parameter_count();

  std::vector<LayerEntry> layer_table() const;
  std::vector<std::uint8_t> relu_masks() const;

  Dropout& dropout() { return *dropout_; }

 private:
  NetConfig config_;
  Sequential branch_a_;
  Sequential branch_b_;
  std::unique_ptr<Dropout> dropout_;
  std::unique_ptr<Dense> dense_;
  std::unique_ptr<Softmax> softmax_;
  std::size_t feat_a_ = 0;
  std::size_t feat_b_ = 0;
};

/// Grayscale images (all input_size square) to an (N, 3, H, W) batch:
/// pixel / 255 replicated on three channels.
Tensor4 to_input(const std::vector<const GrayImage*>& images, std::size_t channels = 3);

/// Eval-mode class probabilities, one row per image.
Matrix predict(Network& net, const std::vector<GrayImage>& images, std::size_t batch_size = 32);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_at_kinks = 0;  ///< perturbation flipped a ReLU
};

/// Relative error |a - n| / max(|a|, |n|, floor) between two derivatives.
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Central finite differences on every parameter of the network for the
/// mean cross-entropy of one labelled batch, eval mode (dropout off).
/// Parameters whose +/- epsilon evaluation changes any ReLU on/off pattern
/// are skipped and counted.
GradientCheckReport gradient_check(Network& net, const Tensor4& x, const std::vector<std::size_t>& labels,
                                   double epsilon = 1e-5);

}  // namespace dbn::nnet
