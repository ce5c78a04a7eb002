#include <algorithm>
#include <cmath>

#include "dbn/error.hpp"
#include "dbn/nnet/layers.hpp"

namespace dbn::nnet {

std::string_view kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::depthwise_conv2d: return "depthwise_conv2d";
    case LayerKind::pointwise_conv2d: return "pointwise_conv2d";
    case LayerKind::residual_block: return "residual_block";
    case LayerKind::ds_block: return "ds_block";
    case LayerKind::relu: return "relu";
    case LayerKind::global_avg_pool: return "global_avg_pool";
    case LayerKind::dense: return "dense";
    case LayerKind::dropout: return "dropout";
    case LayerKind::softmax: return "softmax";
  }
  return "unknown";
}

std::size_t param_count(const LayerSpec& s) {
  const std::size_t k2 = s.kernel * s.kernel;
  const std::size_t b = s.bias ? 1 : 0;
  switch (s.kind) {
    case LayerKind::conv2d:
    case LayerKind::pointwise_conv2d:
      return k2 * s.in_channels * s.out_channels + b * s.out_channels;
    case LayerKind::depthwise_conv2d:
      return k2 * s.in_channels + b * s.in_channels;
    case LayerKind::ds_block:
      return k2 * s.in_channels + s.in_channels * s.out_channels + b * (s.in_channels + s.out_channels);
    case LayerKind::residual_block:
      return 2 * (k2 * s.in_channels * s.in_channels + b * s.in_channels);
    case LayerKind::dense:
      return s.in_channels * s.out_channels + b * s.out_channels;
    default:
      return 0;
  }
}

std::size_t conv_out_size(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (in + 2 * padding < kernel) return 0;
  return (in + 2 * padding - kernel) / stride + 1;
}

void kaiming_fill(std::vector<double>& w, std::size_t fan_in, Rng& rng) {
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& v : w) v = sd * rng.normal();
}

namespace {

// Output positions o in [lo, hi) whose input tap o*stride + k - pad lies
// inside [0, in).
struct Range {
  std::size_t lo, hi;
};

Range valid_outputs(std::size_t out, std::size_t in, std::size_t k, std::size_t stride, std::size_t pad) {
  const auto s = static_cast<std::ptrdiff_t>(stride);
  const auto off = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(pad);
  // need 0 <= o*s + off <= in-1
  std::ptrdiff_t lo = off >= 0 ? 0 : (-off + s - 1) / s;
  std::ptrdiff_t hi_incl = static_cast<std::ptrdiff_t>(in) - 1 - off;
  hi_incl = hi_incl < 0 ? -1 : hi_incl / s;
  std::ptrdiff_t hi = std::min<std::ptrdiff_t>(hi_incl + 1, static_cast<std::ptrdiff_t>(out));
  if (hi < lo) hi = lo;
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

void require_channels(const Shape& in, std::size_t expected, std::string_view who) {
  if (in.c != expected)
    throw ConfigError(std::string(who) + ": expected " + std::to_string(expected) + " channels, got shape " + in.str());
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride,
               std::size_t padding, Rng& rng, LayerKind kind) {
  if (kernel % 2 == 0) throw ConfigError("conv2d: kernel must be odd");
  if (in_channels == 0 || out_channels == 0 || stride == 0) throw ConfigError("conv2d: zero channels or stride");
  spec_ = {kind, in_channels, out_channels, kernel, stride, padding, true, 0.0};
  weight_ = {"weight", std::vector<double>(out_channels * in_channels * kernel * kernel), {}};
  weight_.grad.assign(weight_.value.size(), 0.0);
  bias_ = {"bias", std::vector<double>(out_channels, 0.0), std::vector<double>(out_channels, 0.0)};
  kaiming_fill(weight_.value, in_channels * kernel * kernel, rng);
}

std::unique_ptr<Conv2d> make_pointwise(std::size_t in_channels, std::size_t out_channels, Rng& rng) {
  return std::make_unique<Conv2d>(in_channels, out_channels, 1, 1, 0, rng, LayerKind::pointwise_conv2d);
}

Shape Conv2d::output_shape(const Shape& in) const {
  require_channels(in, spec_.in_channels, kind_name(spec_.kind));
  const auto oh = conv_out_size(in.h, spec_.kernel, spec_.stride, spec_.padding);
  const auto ow = conv_out_size(in.w, spec_.kernel, spec_.stride, spec_.padding);
  if (oh == 0 || ow == 0) throw ConfigError("conv2d: input " + in.str() + " smaller than kernel");
  return {in.n, spec_.out_channels, oh, ow};
}

Tensor4 Conv2d::forward(const Tensor4& x, Mode) {
  const Shape os = output_shape(x.shape());
  const Shape& is = x.shape();
  input_ = x;
  Tensor4 y(os);
  const std::size_t K = spec_.kernel, S = spec_.stride, P = spec_.padding;
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t co = 0; co < os.c; ++co) {
      double* out = &y.at(n, co, 0, 0);
      std::fill(out, out + os.h * os.w, bias_.value[co]);
      for (std::size_t ci = 0; ci < is.c; ++ci) {
        const double* in = &x.at(n, ci, 0, 0);
        const double* wk = &weight_.value[(co * is.c + ci) * K * K];
        for (std::size_t kh = 0; kh < K; ++kh) {
          const auto rh = valid_outputs(os.h, is.h, kh, S, P);
          for (std::size_t kw = 0; kw < K; ++kw) {
            const auto rw = valid_outputs(os.w, is.w, kw, S, P);
            const double wv = wk[kh * K + kw];
            for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
              const double* irow = in + (oh * S + kh - P) * is.w;
              double* orow = out + oh * os.w;
              for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) orow[ow] += wv * irow[ow * S + kw - P];
            }
          }
        }
      }
    }
  return y;
}

Tensor4 Conv2d::backward(const Tensor4& g) {
  const Shape& is = input_.shape();
  const Shape& os = g.shape();
  Tensor4 dx(is);
  const std::size_t K = spec_.kernel, S = spec_.stride, P = spec_.padding;
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t co = 0; co < os.c; ++co) {
      const double* go = &g.at(n, co, 0, 0);
      double db = 0.0;
      for (std::size_t i = 0; i < os.h * os.w; ++i) db += go[i];
      bias_.grad[co] += db;
      for (std::size_t ci = 0; ci < is.c; ++ci) {
        const double* in = &input_.at(n, ci, 0, 0);
        double* din = &dx.at(n, ci, 0, 0);
        const std::size_t wbase = (co * is.c + ci) * K * K;
        for (std::size_t kh = 0; kh < K; ++kh) {
          const auto rh = valid_outputs(os.h, is.h, kh, S, P);
          for (std::size_t kw = 0; kw < K; ++kw) {
            const auto rw = valid_outputs(os.w, is.w, kw, S, P);
            const double wv = weight_.value[wbase + kh * K + kw];
            double dw = 0.0;
            for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
              const std::size_t row = (oh * S + kh - P) * is.w;
              const double* grow = go + oh * os.w;
              for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) {
                const std::size_t idx = row + ow * S + kw - P;
                dw += grow[ow] * in[idx];
                din[idx] += wv * grow[ow];
              }
            }
            weight_.grad[wbase + kh * K + kw] += dw;
          }
        }
      }
    }
  return dx;
}

void Conv2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ------------------------------------------------------- DepthwiseConv2d

DepthwiseConv2d::DepthwiseConv2d(std::size_t channels, std::size_t kernel, std::size_t stride, std::size_t padding,
                                 Rng& rng) {
  if (kernel % 2 == 0) throw ConfigError("depthwise_conv2d: kernel must be odd");
  if (channels == 0 || stride == 0) throw ConfigError("depthwise_conv2d: zero channels or stride");
  spec_ = {LayerKind::depthwise_conv2d, channels, channels, kernel, stride, padding, true, 0.0};
  weight_ = {"weight", std::vector<double>(channels * kernel * kernel), {}};
  weight_.grad.assign(weight_.value.size(), 0.0);
  bias_ = {"bias", std::vector<double>(channels, 0.0), std::vector<double>(channels, 0.0)};
  kaiming_fill(weight_.value, kernel * kernel, rng);
}

Shape DepthwiseConv2d::output_shape(const Shape& in) const {
  require_channels(in, spec_.in_channels, "depthwise_conv2d");
  const auto oh = conv_out_size(in.h, spec_.kernel, spec_.stride, spec_.padding);
  const auto ow = conv_out_size(in.w, spec_.kernel, spec_.stride, spec_.padding);
  if (oh == 0 || ow == 0) throw ConfigError("depthwise_conv2d: input " + in.str() + " smaller than kernel");
  return {in.n, in.c, oh, ow};
}

Tensor4 DepthwiseConv2d::forward(const Tensor4& x, Mode) {
  const Shape os = output_shape(x.shape());
  const Shape& is = x.shape();
  input_ = x;
  Tensor4 y(os);
  const std::size_t K = spec_.kernel, S = spec_.stride, P = spec_.padding;
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t c = 0; c < is.c; ++c) {
      const double* in = &x.at(n, c, 0, 0);
      double* out = &y.at(n, c, 0, 0);
      std::fill(out, out + os.h * os.w, bias_.value[c]);
      const double* wk = &weight_.value[c * K * K];
      for (std::size_t kh = 0; kh < K; ++kh) {
        const auto rh = valid_outputs(os.h, is.h, kh, S, P);
        for (std::size_t kw = 0; kw < K; ++kw) {
          const auto rw = valid_outputs(os.w, is.w, kw, S, P);
          const double wv = wk[kh * K + kw];
          for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
            const double* irow = in + (oh * S + kh - P) * is.w;
            double* orow = out + oh * os.w;
            for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) orow[ow] += wv * irow[ow * S + kw - P];
          }
        }
      }
    }
  return y;
}

Tensor4 DepthwiseConv2d::backward(const Tensor4& g) {
  const Shape& is = input_.shape();
  const Shape& os = g.shape();
  Tensor4 dx(is);
  const std::size_t K = spec_.kernel, S = spec_.stride, P = spec_.padding;
  for (std::size_t n = 0; n < is.n; ++n)
    for (std::size_t c = 0; c < is.c; ++c) {
      const double* go = &g.at(n, c, 0, 0);
      const double* in = &input_.at(n, c, 0, 0);
      double* din = &dx.at(n, c, 0, 0);
      double db = 0.0;
      for (std::size_t i = 0; i < os.h * os.w; ++i) db += go[i];
      bias_.grad[c] += db;
      for (std::size_t kh = 0; kh < K; ++kh) {
        const auto rh = valid_outputs(os.h, is.h, kh, S, P);
        for (std::size_t kw = 0; kw < K; ++kw) {
          const auto rw = valid_outputs(os.w, is.w, kw, S, P);
          const double wv = weight_.value[c * K * K + kh * K + kw];
          double dw = 0.0;
          for (std::size_t oh = rh.lo; oh < rh.hi; ++oh) {
            const std::size_t row = (oh * S + kh - P) * is.w;
            const double* grow = go + oh * os.w;
            for (std::size_t ow = rw.lo; ow < rw.hi; ++ow) {
              const std::size_t idx = row + ow * S + kw - P;
              dw += grow[ow] * in[idx];
              din[idx] += wv * grow[ow];
            }
          }
          weight_.grad[c * K * K + kh * K + kw] += dw;
        }
      }
    }
  return dx;
}

void DepthwiseConv2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ------------------------------------------------------------------ Relu

Relu::Relu(std::size_t channels) { spec_ = {LayerKind::relu, channels, channels, 1, 1, 0, false, 0.0}; }

Tensor4 Relu::forward(const Tensor4& x, Mode) {
  Tensor4 y = x;
  mask_.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_[i] = x[i] > 0.0;
    if (!mask_[i]) y[i] = 0.0;
  }
  return y;
}

Tensor4 Relu::backward(const Tensor4& g) {
  Tensor4 dx = g;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!mask_[i]) dx[i] = 0.0;
  return dx;
}

void Relu::collect_relu_masks(std::vector<std::uint8_t>& out) const { out.insert(out.end(), mask_.begin(), mask_.end()); }

// --------------------------------------------------------- GlobalAvgPool

GlobalAvgPool::GlobalAvgPool(std::size_t channels) {
  spec_ = {LayerKind::global_avg_pool, channels, channels, 1, 1, 0, false, 0.0};
}

Tensor4 GlobalAvgPool::forward(const Tensor4& x, Mode) {
  in_shape_ = x.shape();
  Tensor4 y(output_shape(in_shape_));
  const std::size_t hw = in_shape_.h * in_shape_.w;
  for (std::size_t n = 0; n < in_shape_.n; ++n)
    for (std::size_t c = 0; c < in_shape_.c; ++c) {
      const double* p = &x.at(n, c, 0, 0);
      double s = 0.0;
      for (std::size_t i = 0; i < hw; ++i) s += p[i];
      y.at(n, c, 0, 0) = s / static_cast<double>(hw);
    }
  return y;
}

Tensor4 GlobalAvgPool::backward(const Tensor4& g) {
  Tensor4 dx(in_shape_);
  const std::size_t hw = in_shape_.h * in_shape_.w;
  for (std::size_t n = 0; n < in_shape_.n; ++n)
    for (std::size_t c = 0; c < in_shape_.c; ++c) {
      const double v = g.at(n, c, 0, 0) / static_cast<double>(hw);
      double* p = &dx.at(n, c, 0, 0);
      std::fill(p, p + hw, v);
    }
  return dx;
}

// ----------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t out_features, Rng& rng) {
  if (in_features == 0 || out_features == 0) throw ConfigError("dense: zero features");
  spec_ = {LayerKind::dense, in_features, out_features, 1, 1, 0, true, 0.0};
  weight_ = {"weight", std::vector<double>(in_features * out_features), {}};
  weight_.grad.assign(weight_.value.size(), 0.0);
  bias_ = {"bias", std::vector<double>(out_features, 0.0), std::vector<double>(out_features, 0.0)};
  kaiming_fill(weight_.value, in_features, rng);
}

Tensor4 Dense::forward(const Tensor4& x, Mode) {
  const Shape& is = x.shape();
  if (is.c * is.h * is.w != spec_.in_channels)
    throw ConfigError("dense: expected " + std::to_string(spec_.in_channels) + " features, got " + is.str());
  input_ = x;
  const std::size_t in = spec_.in_channels, out = spec_.out_channels;
  Tensor4 y({is.n, out, 1, 1});
  for (std::size_t n = 0; n < is.n; ++n) {
    const double* xi = x.data() + n * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double* w = &weight_.value[o * in];
      double s = bias_.value[o];
      for (std::size_t i = 0; i < in; ++i) s += w[i] * xi[i];
      y[n * out + o] = s;
    }
  }
  return y;
}

Tensor4 Dense::backward(const Tensor4& g) {
  const std::size_t in = spec_.in_channels, out = spec_.out_channels;
  const std::size_t batch = input_.shape().n;
  Tensor4 dx(input_.shape());
  for (std::size_t n = 0; n < batch; ++n) {
    const double* xi = input_.data() + n * in;
    double* dxi = dx.data() + n * in;
    for (std::size_t o = 0; o < out; ++o) {
      const double go = g[n * out + o];
      bias_.grad[o] += go;
      const double* w = &weight_.value[o * in];
      double* dw = &weight_.grad[o * in];
      for (std::size_t i = 0; i < in; ++i) {
        dw[i] += go * xi[i];
        dxi[i] += go * w[i];
      }
    }
  }
  return dx;
}

void Dense::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// --------------------------------------------------------------- Dropout

Dropout::Dropout(std::size_t channels, double rate, std::uint64_t seed) : rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must lie in [0, 1)");
  spec_ = {LayerKind::dropout, channels, channels, 1, 1, 0, false, rate};
}

Tensor4 Dropout::forward(const Tensor4& x, Mode mode) {
  if (mode == Mode::eval || spec_.rate == 0.0) {
    scale_.clear();
    return x;
  }
  const double keep = 1.0 / (1.0 - spec_.rate);
  scale_.resize(x.size());
  Tensor4 y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    scale_[i] = rng_.chance(spec_.rate) ? 0.0 : keep;
    y[i] *= scale_[i];
  }
  return y;
}

Tensor4 Dropout::backward(const Tensor4& g) {
  if (scale_.empty()) return g;
  Tensor4 dx = g;
  for (std::size_t i = 0; i < g.size(); ++i) dx[i] *= scale_[i];
  return dx;
}

// --------------------------------------------------------------- Softmax

Softmax::Softmax(std::size_t classes) { spec_ = {LayerKind::softmax, classes, classes, 1, 1, 0, false, 0.0}; }

Tensor4 Softmax::forward(const Tensor4& x, Mode) {
  const Shape& s = x.shape();
  const std::size_t k = s.c * s.h * s.w;
  Tensor4 y(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    const double* in = x.data() + n * k;
    double* out = y.data() + n * k;
    const double mx = *std::max_element(in, in + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (std::size_t j = 0; j < k; ++j) out[j] /= sum;
  }
  output_ = y;
  return y;
}

Tensor4 Softmax::backward(const Tensor4& g) {
  const Shape& s = output_.shape();
  const std::size_t k = s.c * s.h * s.w;
  Tensor4 dx(s);
  for (std::size_t n = 0; n < s.n; ++n) {
    const double* y = output_.data() + n * k;
    const double* gi = g.data() + n * k;
    double dot = 0.0;
    for (std::size_t j = 0; j < k; ++j) dot += gi[j] * y[j];
    for (std::size_t j = 0; j < k; ++j) dx[n * k + j] = y[j] * (gi[j] - dot);
  }
  return dx;
}

}  // namespace dbn::nnet
