#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dbn/nnet/tensor.hpp"
#include "dbn/rng.hpp"

namespace dbn::nnet {

enum class LayerKind : std::uint32_t {
  conv2d = 1,
  depthwise_conv2d = 2,
  pointwise_conv2d = 3,
  residual_block = 4,
  ds_block = 5,
  relu = 6,
  global_avg_pool = 7,
  dense = 8,
  dropout = 9,
  softmax = 10,
};

std::string_view kind_name(LayerKind kind);

/// Shape description of one layer. For dense, `in_channels`/`out_channels`
/// are the feature widths; for depthwise layers out_channels == in_channels.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool bias = true;
  double rate = 0.0;  ///< dropout only

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Trainable parameter count of a layer.
///   conv2d / pointwise:  K*K*Cin*Cout (+ Cout)
///   depthwise:           K*K*C (+ C)
///   ds_block:            K*K*Cin + Cin*Cout (+ Cin + Cout)
///   residual_block:      2 * (K*K*C*C (+ C))
///   dense:               Cin*Cout (+ Cout)
std::size_t param_count(const LayerSpec& spec);

/// Output spatial size of a strided, zero-padded window.
std::size_t conv_out_size(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding);

struct Param {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;
};

enum class Mode { train, eval };

/// Layers cache what they need from forward() for the next backward().
/// backward() takes dL/d(output), accumulates parameter gradients and
/// returns dL/d(input).
class Layer {
 public:
  virtual ~Layer() = default;

  virtual const LayerSpec& spec() const = 0;
  virtual Shape output_shape(const Shape& in) const = 0;
  virtual Tensor4 forward(const Tensor4& x, Mode mode) = 0;
  virtual Tensor4 backward(const Tensor4& grad_out) = 0;

  virtual void collect_params(std::vector<Param*>&) {}
  /// Appends the on/off pattern of every ReLU from the last forward pass.
  virtual void collect_relu_masks(std::vector<std::uint8_t>&) const {}
};

/// Kaiming-normal fill: N(0, 2 / fan_in).
void kaiming_fill(std::vector<double>& w, std::size_t fan_in, Rng& rng);

/// Standard cross-correlation, zero padding. Also serves as the pointwise
/// (1x1) stage when constructed with LayerKind::pointwise_conv2d.
class Conv2d : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
         std::size_t padding, Rng& rng, LayerKind kind = LayerKind::conv2d);

  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override;
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;

  /// [Cout][Cin][K][K]
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  LayerSpec spec_;
  Param weight_;
  Param bias_;
  Tensor4 input_;
};

std::unique_ptr<Conv2d> make_pointwise(std::size_t in_channels, std::size_t out_channels, Rng& rng);

/// Per-channel K x K cross-correlation; no channel mixing.
class DepthwiseConv2d : public Layer {
 public:
  DepthwiseConv2d(std::size_t channels, std::size_t kernel, std::size_t stride, std::size_t padding, Rng& rng);

  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override;
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;

  /// [C][K][K]
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  LayerSpec spec_;
  Param weight_;
  Param bias_;
  Tensor4 input_;
};

class Relu : public Layer {
 public:
  explicit Relu(std::size_t channels = 0);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  void collect_relu_masks(std::vector<std::uint8_t>& out) const override;

 private:
  LayerSpec spec_;
  std::vector<std::uint8_t> mask_;
};

/// (N, C, H, W) -> (N, C, 1, 1)
class GlobalAvgPool : public Layer {
 public:
  explicit GlobalAvgPool(std::size_t channels);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override { return {in.n, in.c, 1, 1}; }
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;

 private:
  LayerSpec spec_;
  Shape in_shape_;
};

/// Fully connected on (N, Cin, 1, 1) -> (N, Cout, 1, 1).
class Dense : public Layer {
 public:
  Dense(std::size_t in_features, std::size_t out_features, Rng& rng);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override { return {in.n, spec_.out_channels, 1, 1}; }
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;

  /// [Cout][Cin]
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  LayerSpec spec_;
  Param weight_;
  Param bias_;
  Tensor4 input_;
};

/// Inverted dropout: in train mode zeroes each unit with probability
/// `rate` and scales survivors by 1/(1-rate); identity in eval mode.
class Dropout : public Layer {
 public:
  Dropout(std::size_t channels, double rate, std::uint64_t seed);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

 private:
  LayerSpec spec_;
  Rng rng_;
  std::vector<double> scale_;
};

/// Softmax over the channel axis of (N, K, 1, 1).
class Softmax : public Layer {
 public:
  explicit Softmax(std::size_t classes);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;

 private:
  LayerSpec spec_;
  Tensor4 output_;
};

/// conv -> relu -> conv, identity skip, relu:  out = relu(F(x) + x).
class ResidualBlock : public Layer {
 public:
  ResidualBlock(std::size_t channels, std::size_t kernel, Rng& rng);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override;
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;
  void collect_relu_masks(std::vector<std::uint8_t>& out) const override;

  Conv2d& first() { return conv1_; }
  Conv2d& second() { return conv2_; }

 private:
  LayerSpec spec_;
  Conv2d conv1_;
  Relu relu1_;
  Conv2d conv2_;
  Relu relu_out_;
};

/// Depthwise-separable block: depthwise K x K -> relu -> pointwise -> relu.
class DsBlock : public Layer {
 public:
  DsBlock(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride, Rng& rng);
  const LayerSpec& spec() const override { return spec_; }
  Shape output_shape(const Shape& in) const override;
  Tensor4 forward(const Tensor4& x, Mode mode) override;
  Tensor4 backward(const Tensor4& grad_out) override;
  void collect_params(std::vector<Param*>& out) override;
  void collect_relu_masks(std::vector<std::uint8_t>& out) const override;

  DepthwiseConv2d& depthwise() { return dw_; }
  Conv2d& pointwise() { return pw_; }

 private:
  LayerSpec spec_;
  DepthwiseConv2d dw_;
  Relu relu1_;
  Conv2d pw_;
  Relu relu2_;
};

/// Ordered chain of layers.
class Sequential {
 public:
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  Tensor4 forward(const Tensor4& x, Mode mode);
  Tensor4 backward(const Tensor4& grad_out);
  Shape output_shape(Shape in) const;
  void collect_params(std::vector<Param*>& out);
  void collect_relu_masks(std::vector<std::uint8_t>& out) const;

  std::size_t size() const { return layers_.size(); }
  Layer& operator[](std::size_t i) { return *layers_[i]; }
  const Layer& operator[](std::size_t i) const { return *layers_[i]; }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace dbn::nnet
