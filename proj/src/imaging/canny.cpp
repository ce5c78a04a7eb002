#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "dbn/error.hpp"
#include "dbn/imaging.hpp"

// The smoothing and gradient stages run in integer fixed point: Gaussian
// taps are quantized to a 1024 scale, so the smoothed image is an exact
// integer multiple of the input and Sobel differences are exact. Edge maps
// are therefore bit-stable across platforms and exactly invariant to adding
// a constant to the image.

namespace dbn::imaging {

std::size_t EdgeMap::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

GrayImage EdgeMap::to_image() const {
  std::vector<std::uint8_t> px(data.size());
  std::transform(data.begin(), data.end(), px.begin(), [](std::uint8_t v) { return v ? 255 : 0; });
  return GrayImage(width, height, std::move(px));
}

namespace {

std::vector<std::int64_t> gaussian_taps(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> g;
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    g.push_back(std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma)));
    sum += g.back();
  }
  std::vector<std::int64_t> taps;
  for (double v : g) taps.push_back(static_cast<std::int64_t>(std::floor(1024.0 * v / sum + 0.5)));
  return taps;
}

}  // namespace

EdgeMap canny(const GrayImage& image, const CannyParams& params) {
  if (!(params.gaussian_sigma > 0.0)) throw ConfigError("canny: gaussian_sigma must be > 0");
  if (!(params.low_threshold >= 0.0 && params.low_threshold < params.high_threshold))
    throw ConfigError("canny: need 0 <= low_threshold < high_threshold");
  const std::size_t W = image.width();
  const std::size_t H = image.height();
  if (W < 5 || H < 5)
    throw ConfigError("canny: image " + std::to_string(W) + "x" + std::to_string(H) + " smaller than 5x5");

  const auto taps = gaussian_taps(params.gaussian_sigma);
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  std::int64_t tap_sum = 0;
  for (auto t : taps) tap_sum += t;

  auto cx = [&](std::ptrdiff_t x) { return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x, 0, W - 1)); };
  auto cy = [&](std::ptrdiff_t y) { return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y, 0, H - 1)); };

  std::vector<std::int64_t> tmp(W * H), smooth(W * H);
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x) {
      std::int64_t acc = 0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i)
        acc += taps[static_cast<std::size_t>(i + radius)] * image.at(cx(static_cast<std::ptrdiff_t>(x) + i), y);
      tmp[y * W + x] = acc;
    }
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x) {
      std::int64_t acc = 0;
      for (std::ptrdiff_t j = -radius; j <= radius; ++j)
        acc += taps[static_cast<std::size_t>(j + radius)] * tmp[cy(static_cast<std::ptrdiff_t>(y) + j) * W + x];
      smooth[y * W + x] = acc;
    }

  auto s = [&](std::ptrdiff_t x, std::ptrdiff_t y) { return smooth[cy(y) * W + cx(x)]; };
  std::vector<std::int64_t> gx(W * H), gy(W * H), mag2(W * H);
  for (std::size_t uy = 0; uy < H; ++uy)
    for (std::size_t ux = 0; ux < W; ++ux) {
      const auto x = static_cast<std::ptrdiff_t>(ux);
      const auto y = static_cast<std::ptrdiff_t>(uy);
      const std::int64_t dx = (s(x + 1, y - 1) + 2 * s(x + 1, y) + s(x + 1, y + 1)) -
                              (s(x - 1, y - 1) + 2 * s(x - 1, y) + s(x - 1, y + 1));
      const std::int64_t dy = (s(x - 1, y + 1) + 2 * s(x, y + 1) + s(x + 1, y + 1)) -
                              (s(x - 1, y - 1) + 2 * s(x, y - 1) + s(x + 1, y - 1));
      const std::size_t i = uy * W + ux;
      gx[i] = dx;
      gy[i] = dy;
      mag2[i] = dx * dx + dy * dy;
    }

  auto mag_at = [&](std::ptrdiff_t x, std::ptrdiff_t y) -> std::int64_t {
    if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(W) || y >= static_cast<std::ptrdiff_t>(H)) return 0;
    return mag2[static_cast<std::size_t>(y) * W + static_cast<std::size_t>(x)];
  };

  // Non-maximum suppression over 4 directions; tan(22.5) and tan(67.5) in
  // Q15 fixed point. Ties keep the pixel on the negative side only.
  constexpr std::int64_t kTan22 = 13573;
  constexpr std::int64_t kTan67 = 79109;
  std::vector<std::uint8_t> thin(W * H, 0);
  for (std::size_t uy = 0; uy < H; ++uy)
    for (std::size_t ux = 0; ux < W; ++ux) {
      const std::size_t i = uy * W + ux;
      const std::int64_t m = mag2[i];
      if (m == 0) continue;
      const auto x = static_cast<std::ptrdiff_t>(ux);
      const auto y = static_cast<std::ptrdiff_t>(uy);
      const std::int64_t ax = std::llabs(gx[i]);
      const std::int64_t ay = std::llabs(gy[i]);
      std::int64_t before, after;
      if ((ay << 15) < ax * kTan22) {
        before = mag_at(x - 1, y);
        after = mag_at(x + 1, y);
      } else if ((ay << 15) > ax * kTan67) {
        before = mag_at(x, y - 1);
        after = mag_at(x, y + 1);
      } else if ((gx[i] > 0) == (gy[i] > 0)) {
        before = mag_at(x - 1, y - 1);
        after = mag_at(x + 1, y + 1);
      } else {
        before = mag_at(x + 1, y - 1);
        after = mag_at(x - 1, y + 1);
      }
      if (m > before && m >= after) thin[i] = 1;
    }

  // Magnitudes carry a factor tap_sum^2 from the two smoothing passes.
  const long double scale = static_cast<long double>(tap_sum) * static_cast<long double>(tap_sum);
  const long double lo = params.low_threshold * scale;
  const long double hi = params.high_threshold * scale;
  const long double lo2 = lo * lo;
  const long double hi2 = hi * hi;

  EdgeMap out{W, H, std::vector<std::uint8_t>(W * H, 0)};
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < W * H; ++i)
    if (thin[i] && static_cast<long double>(mag2[i]) >= hi2) {
      out.data[i] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const auto x = static_cast<std::ptrdiff_t>(i % W);
    const auto y = static_cast<std::ptrdiff_t>(i / W);
    for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
      for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
        const auto nx = x + dx;
        const auto ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(W) || ny >= static_cast<std::ptrdiff_t>(H)) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * W + static_cast<std::size_t>(nx);
        if (!out.data[j] && thin[j] && static_cast<long double>(mag2[j]) >= lo2) {
          out.data[j] = 1;
          stack.push_back(j);
        }
      }
  }
  return out;
}

}  // namespace dbn::imaging
