#include "dbn/error.hpp"
#include "dbn/nnet/layers.hpp"

namespace dbn::nnet {

// --------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(std::size_t channels, std::size_t kernel, Rng& rng)
    : conv1_(channels, channels, kernel, 1, kernel / 2, rng),
      relu1_(channels),
      conv2_(channels, channels, kernel, 1, kernel / 2, rng),
      relu_out_(channels) {
  spec_ = {LayerKind::residual_block, channels, channels, kernel, 1, kernel / 2, true, 0.0};
}

Shape ResidualBlock::output_shape(const Shape& in) const {
  if (in.c != spec_.in_channels)
    throw ConfigError("residual_block: identity skip needs " + std::to_string(spec_.in_channels) +
                      " input channels, got " + in.str());
  return in;
}

Tensor4 ResidualBlock::forward(const Tensor4& x, Mode mode) {
  output_shape(x.shape());
  Tensor4 f = conv2_.forward(relu1_.forward(conv1_.forward(x, mode), mode), mode);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += x[i];
  return relu_out_.forward(f, mode);
}

Tensor4 ResidualBlock::backward(const Tensor4& g) {
  const Tensor4 gsum = relu_out_.backward(g);
  Tensor4 dx = conv1_.backward(relu1_.backward(conv2_.backward(gsum)));
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += gsum[i];  // skip path
  return dx;
}

void ResidualBlock::collect_params(std::vector<Param*>& out) {
  conv1_.collect_params(out);
  conv2_.collect_params(out);
}

void ResidualBlock::collect_relu_masks(std::vector<std::uint8_t>& out) const {
  relu1_.collect_relu_masks(out);
  relu_out_.collect_relu_masks(out);
}

// ---------------------------------------------------------------- DsBlock

DsBlock::DsBlock(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride, Rng& rng)
    : dw_(in_channels, kernel, stride, kernel / 2, rng),
      relu1_(in_channels),
      pw_(in_channels, out_channels, 1, 1, 0, rng, LayerKind::pointwise_conv2d),
      relu2_(out_channels) {
  spec_ = {LayerKind::ds_block, in_channels, out_channels, kernel, stride, kernel / 2, true, 0.0};
}

Shape DsBlock::output_shape(const Shape& in) const { return pw_.output_shape(dw_.output_shape(in)); }

Tensor4 DsBlock::forward(const Tensor4& x, Mode mode) {
  return relu2_.forward(pw_.forward(relu1_.forward(dw_.forward(x, mode), mode), mode), mode);
}

Tensor4 DsBlock::backward(const Tensor4& g) {
  return dw_.backward(relu1_.backward(pw_.backward(relu2_.backward(g))));
}

void DsBlock::collect_params(std::vector<Param*>& out) {
  dw_.collect_params(out);
  pw_.collect_params(out);
}

void DsBlock::collect_relu_masks(std::vector<std::uint8_t>& out) const {
  relu1_.collect_relu_masks(out);
  relu2_.collect_relu_masks(out);
}

// ------------------------------------------------------------- Sequential

Tensor4 Sequential::forward(const Tensor4& x, Mode mode) {
  Tensor4 y = x;
  for (auto& l : layers_) y = l->forward(y, mode);
  return y;
}

Tensor4 Sequential::backward(const Tensor4& grad_out) {
  Tensor4 g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

Shape Sequential::output_shape(Shape in) const {
  for (const auto& l : layers_) in = l->output_shape(in);
  return in;
}

void Sequential::collect_params(std::vector<Param*>& out) {
  for (auto& l : layers_) l->collect_params(out);
}

void Sequential::collect_relu_masks(std::vector<std::uint8_t>& out) const {
  for (const auto& l : layers_) l->collect_relu_masks(out);
}

}  // namespace dbn::nnet
