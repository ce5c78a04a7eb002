#include "dbn/nnet/network.hpp"

#include <algorithm>
#include <cmath>

#include "dbn/error.hpp"

namespace dbn::nnet {

void NetConfig::validate() const {
  if (input_size < 16) throw ConfigError("network: input_size " + std::to_string(input_size) + " < 16");
  if (classes < 2) throw ConfigError("network: need at least 2 classes");
  if (width == 0 || input_channels == 0) throw ConfigError("network: zero width or input channels");
  if (kernel % 2 == 0) throw ConfigError("network: kernel must be odd");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("network: dropout_rate must lie in [0, 1)");
}

Network::Network(const NetConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  const std::size_t W = config_.width, K = config_.kernel;

  branch_a_.add(std::make_unique<Conv2d>(config_.input_channels, W, K, 2, K / 2, rng));
  branch_a_.add(std::make_unique<Relu>(W));
  branch_a_.add(std::make_unique<ResidualBlock>(W, K, rng));
  branch_a_.add(std::make_unique<ResidualBlock>(W, K, rng));
  branch_a_.add(std::make_unique<GlobalAvgPool>(W));

  branch_b_.add(std::make_unique<DsBlock>(config_.input_channels, W, K, 2, rng));
  branch_b_.add(std::make_unique<DsBlock>(W, W, K, 1, rng));
  branch_b_.add(std::make_unique<GlobalAvgPool>(W));

  const Shape in = input_shape(1);
  feat_a_ = branch_a_.output_shape(in).c;
  feat_b_ = branch_b_.output_shape(in).c;
  dropout_ = std::make_unique<Dropout>(feat_a_ + feat_b_, config_.dropout_rate, stage_seed(config_.seed, "dropout"));
  dense_ = std::make_unique<Dense>(feat_a_ + feat_b_, config_.classes, rng);
  softmax_ = std::make_unique<Softmax>(config_.classes);
}

Shape Network::input_shape(std::size_t batch) const {
  return {batch, config_.input_channels, config_.input_size, config_.input_size};
}

Tensor4 Network::logits(const Tensor4& x, Mode mode) {
  const Shape& s = x.shape();
  if (s.c != config_.input_channels || s.h != config_.input_size || s.w != config_.input_size)
    throw ConfigError("network: input " + s.str() + " does not match " + input_shape(s.n).str());
  const Tensor4 a = branch_a_.forward(x, mode);
  const Tensor4 b = branch_b_.forward(x, mode);
  Tensor4 cat({s.n, feat_a_ + feat_b_, 1, 1});
  for (std::size_t n = 0; n < s.n; ++n) {
    std::copy_n(a.data() + n * feat_a_, feat_a_, cat.data() + n * (feat_a_ + feat_b_));
    std::copy_n(b.data() + n * feat_b_, feat_b_, cat.data() + n * (feat_a_ + feat_b_) + feat_a_);
  }
  return dense_->forward(dropout_->forward(cat, mode), mode);
}

Tensor4 Network::forward(const Tensor4& x, Mode mode) { return softmax_->forward(logits(x, mode), mode); }

namespace {

void check_labels(const std::vector<std::size_t>& labels, std::size_t batch, std::size_t classes) {
  if (labels.size() != batch) throw ConfigError("network: label count does not match batch");
  for (auto y : labels)
    if (y >= classes) throw ConfigError("network: label " + std::to_string(y) + " >= K=" + std::to_string(classes));
}

// Mean cross-entropy of logits z against labels; optional dL/dz.
double softmax_xent(const Tensor4& z, const std::vector<std::size_t>& labels, Tensor4* grad) {
  const std::size_t N = z.shape().n, K = z.shape().c;
  double total = 0.0;
  if (grad) *grad = Tensor4(z.shape());
  for (std::size_t n = 0; n < N; ++n) {
    const double* zi = z.data() + n * K;
    const double mx = *std::max_element(zi, zi + K);
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(zi[k] - mx);
    const double lse = mx + std::log(sum);
    total += lse - zi[labels[n]];
    if (grad)
      for (std::size_t k = 0; k < K; ++k)
        (*grad)[n * K + k] = (std::exp(zi[k] - lse) - (k == labels[n] ? 1.0 : 0.0)) / static_cast<double>(N);
  }
  return total / static_cast<double>(N);
}

}  // namespace

double Network::loss(const Tensor4& x, const std::vector<std::size_t>& labels, Mode mode) {
  check_labels(labels, x.shape().n, config_.classes);
  return softmax_xent(logits(x, mode), labels, nullptr);
}

double Network::loss_and_backward(const Tensor4& x, const std::vector<std::size_t>& labels, Mode mode) {
  check_labels(labels, x.shape().n, config_.classes);
  if (x.shape().n == 0) throw ConfigError("network: empty batch");
  Tensor4 g;
  const double l = softmax_xent(logits(x, mode), labels, &g);
  const Tensor4 gcat = dropout_->backward(dense_->backward(g));
  const std::size_t N = x.shape().n, F = feat_a_ + feat_b_;
  Tensor4 ga({N, feat_a_, 1, 1}), gb({N, feat_b_, 1, 1});
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(gcat.data() + n * F, feat_a_, ga.data() + n * feat_a_);
    std::copy_n(gcat.data() + n * F + feat_a_, feat_b_, gb.data() + n * feat_b_);
  }
  branch_a_.backward(ga);
  branch_b_.backward(gb);
  return l;
}

Tensor4 Network::backward_from_probabilities(const Tensor4& grad_probs) {
  const Tensor4 gcat = dropout_->backward(dense_->backward(softmax_->backward(grad_probs)));
  const std::size_t N = gcat.shape().n, F = feat_a_ + feat_b_;
  Tensor4 ga({N, feat_a_, 1, 1}), gb({N, feat_b_, 1, 1});
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(gcat.data() + n * F, feat_a_, ga.data() + n * feat_a_);
    std::copy_n(gcat.data() + n * F + feat_a_, feat_b_, gb.data() + n * feat_b_);
  }
  Tensor4 dx = branch_a_.backward(ga);
  const Tensor4 dxb = branch_b_.backward(gb);
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dxb[i];
  return dx;
}

void Network::zero_grad() {
  for (auto* p : parameters()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

std::vector<Param*> Network::parameters() {
  std::vector<Param*> out;
  branch_a_.collect_params(out);
  branch_b_.collect_params(out);
  dense_->collect_params(out);
  return out;
}

std::vector<Param*> Network::head_parameters() {
  std::vector<Param*> out;
  dense_->collect_params(out);
  return out;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (auto* p : parameters()) n += p->value.size();
  return n;
}

std::vector<LayerEntry> Network::layer_table() const {
  std::vector<LayerEntry> t;
  for (std::size_t i = 0; i < branch_a_.size(); ++i) t.push_back({"branch_a", branch_a_[i].spec()});
  for (std::size_t i = 0; i < branch_b_.size(); ++i) t.push_back({"branch_b", branch_b_[i].spec()});
  t.push_back({"head", dropout_->spec()});
  t.push_back({"head", dense_->spec()});
  t.push_back({"head", softmax_->spec()});
  return t;
}

std::vector<std::uint8_t> Network::relu_masks() const {
  std::vector<std::uint8_t> m;
  branch_a_.collect_relu_masks(m);
  branch_b_.collect_relu_masks(m);
  return m;
}

Tensor4 to_input(const std::vector<const GrayImage*>& images, std::size_t channels) {
  if (images.empty()) throw ConfigError("to_input: empty batch");
  const std::size_t w = images.front()->width(), h = images.front()->height();
  Tensor4 t({images.size(), channels, h, w});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const GrayImage& img = *images[n];
    if (img.width() != w || img.height() != h) throw ConfigError("to_input: images differ in size");
    for (std::size_t c = 0; c < channels; ++c) {
      double* dst = &t.at(n, c, 0, 0);
      for (std::size_t i = 0; i < img.size(); ++i) dst[i] = static_cast<double>(img.pixels()[i]) / 255.0;
    }
  }
  return t;
}

Matrix predict(Network& net, const std::vector<GrayImage>& images, std::size_t batch_size) {
  const std::size_t K = net.config().classes;
  Matrix probs(images.size(), K);
  for (std::size_t start = 0; start < images.size(); start += batch_size) {
    const std::size_t end = std::min(images.size(), start + batch_size);
    std::vector<const GrayImage*> batch;
    for (std::size_t i = start; i < end; ++i) {
      if (images[i].width() != net.config().input_size || images[i].height() != net.config().input_size)
        throw ConfigError("predict: image " + std::to_string(i) + " is " + std::to_string(images[i].width()) + "x" +
                          std::to_string(images[i].height()) + ", network expects " +
                          std::to_string(net.config().input_size));
      batch.push_back(&images[i]);
    }
    const Tensor4 p = net.forward(to_input(batch, net.config().input_channels), Mode::eval);
    for (std::size_t i = start; i < end; ++i) std::copy_n(p.data() + (i - start) * K, K, probs.row(i));
  }
  return probs;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradientCheckReport gradient_check(Network& net, const Tensor4& x, const std::vector<std::size_t>& labels,
                                   double epsilon) {
  net.zero_grad();
  net.loss_and_backward(x, labels, Mode::eval);
  const auto base_masks = net.relu_masks();

  GradientCheckReport rep;
  for (Param* p : net.parameters()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + epsilon;
      const double lp = net.loss(x, labels, Mode::eval);
      const bool kink_p = net.relu_masks() != base_masks;
      p->value[i] = orig - epsilon;
      const double lm = net.loss(x, labels, Mode::eval);
      const bool kink_m = net.relu_masks() != base_masks;
      p->value[i] = orig;
      if (kink_p || kink_m) {
        ++rep.skipped_at_kinks;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * epsilon);
      rep.max_relative_error = std::max(rep.max_relative_error, relative_error(p->grad[i], numeric));
      ++rep.checked;
    }
  }
  return rep;
}

}  // namespace dbn::nnet
