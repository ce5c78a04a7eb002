#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "dbn/error.hpp"
#include "dbn/imaging.hpp"

namespace dbn::imaging {

GrayImage box_blur(const GrayImage& image, std::size_t m, std::size_t n) {
  if (m == 0 || n == 0 || m % 2 == 0 || n % 2 == 0)
    throw ConfigError("box_blur: kernel " + std::to_string(m) + "x" + std::to_string(n) + " must be odd and >= 1");
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto rx = static_cast<std::ptrdiff_t>(m / 2);
  const auto ry = static_cast<std::ptrdiff_t>(n / 2);
  const std::uint64_t area = m * n;

  GrayImage out(image.width(), image.height());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      std::uint64_t sum = 0;
      for (std::ptrdiff_t j = -ry; j <= ry; ++j) {
        const auto yy = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y + j, 0, h - 1));
        for (std::ptrdiff_t i = -rx; i <= rx; ++i) {
          const auto xx = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x + i, 0, w - 1));
          sum += image.at(xx, yy);
        }
      }
      // round half-up of sum / area in integers
      out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
          static_cast<std::uint8_t>((2 * sum + area) / (2 * area));
    }
  }
  return out;
}

std::vector<std::uint8_t> equalization_lut(const GrayImage& image) {
  std::array<std::uint64_t, 256> hist{};
  for (auto p : image.pixels()) ++hist[p];
  const std::uint64_t total = image.size();
  std::vector<std::uint8_t> lut(256);
  std::uint64_t cdf = 0;
  for (std::size_t k = 0; k < 256; ++k) {
    cdf += hist[k];
    lut[k] = static_cast<std::uint8_t>((2 * 255 * cdf + total) / (2 * total));
  }
  return lut;
}

GrayImage equalize_histogram(const GrayImage& image) {
  const auto lut = equalization_lut(image);
  GrayImage out = image;
  for (auto& p : out.pixels()) p = lut[p];
  return out;
}

namespace {

// Boundaries of `tiles` near-equal spans covering [0, size).
std::vector<std::size_t> tile_edges(std::size_t size, std::size_t tiles) {
  std::vector<std::size_t> e(tiles + 1);
  for (std::size_t i = 0; i <= tiles; ++i) e[i] = i * size / tiles;
  return e;
}

struct AxisBlend {
  std::size_t lo;
  std::size_t hi;
  double w;  // weight of hi
};

// For each pixel, the two neighbouring tile centers and the blend weight.
std::vector<AxisBlend> axis_blend(const std::vector<std::size_t>& edges, std::size_t size) {
  const std::size_t tiles = edges.size() - 1;
  std::vector<double> centers(tiles);
  for (std::size_t i = 0; i < tiles; ++i) centers[i] = (static_cast<double>(edges[i] + edges[i + 1]) - 1.0) / 2.0;

  std::vector<AxisBlend> out(size);
  std::size_t t = 0;
  for (std::size_t p = 0; p < size; ++p) {
    const double x = static_cast<double>(p);
    if (x <= centers.front()) {
      out[p] = {0, 0, 0.0};
    } else if (x >= centers.back()) {
      out[p] = {tiles - 1, tiles - 1, 0.0};
    } else {
      while (centers[t + 1] <= x) ++t;
      out[p] = {t, t + 1, (x - centers[t]) / (centers[t + 1] - centers[t])};
    }
  }
  return out;
}

}  // namespace

GrayImage clahe(const GrayImage& image, const ClaheParams& params) {
  if (params.tiles_x == 0 || params.tiles_y == 0) throw ConfigError("clahe: tile counts must be >= 1");
  if (!(params.clip_limit >= 1.0)) throw ConfigError("clahe: clip_limit must be >= 1");
  if (params.tiles_x > image.width() || params.tiles_y > image.height())
    throw ConfigError("clahe: " + std::to_string(params.tiles_x) + "x" + std::to_string(params.tiles_y) +
                      " tiles exceed image size " + std::to_string(image.width()) + "x" +
                      std::to_string(image.height()));

  const auto ex = tile_edges(image.width(), params.tiles_x);
  const auto ey = tile_edges(image.height(), params.tiles_y);

  // One 256-entry mapping per tile.
  std::vector<std::array<std::uint8_t, 256>> luts(params.tiles_x * params.tiles_y);
  for (std::size_t ty = 0; ty < params.tiles_y; ++ty) {
    for (std::size_t tx = 0; tx < params.tiles_x; ++tx) {
      std::array<double, 256> hist{};
      for (std::size_t y = ey[ty]; y < ey[ty + 1]; ++y)
        for (std::size_t x = ex[tx]; x < ex[tx + 1]; ++x) hist[image.at(x, y)] += 1.0;
      const double area = static_cast<double>((ex[tx + 1] - ex[tx]) * (ey[ty + 1] - ey[ty]));

      if (std::isfinite(params.clip_limit)) {
        const double limit = params.clip_limit * area / 256.0;
        double excess = 0.0;
        for (auto& h : hist) {
          if (h > limit) {
            excess += h - limit;
            h = limit;
          }
        }
        const double share = excess / 256.0;
        for (auto& h : hist) h += share;
      }

      auto& lut = luts[ty * params.tiles_x + tx];
      double cdf = 0.0;
      for (std::size_t k = 0; k < 256; ++k) {
        cdf += hist[k];
        lut[k] = to_u8(255.0 * cdf / area);
      }
    }
  }

  const auto bx = axis_blend(ex, image.width());
  const auto by = axis_blend(ey, image.height());
  GrayImage out(image.width(), image.height());
  for (std::size_t y = 0; y < image.height(); ++y) {
    const auto& b = by[y];
    for (std::size_t x = 0; x < image.width(); ++x) {
      const auto& a = bx[x];
      const auto v = image.at(x, y);
      const double tl = luts[b.lo * params.tiles_x + a.lo][v];
      const double tr = luts[b.lo * params.tiles_x + a.hi][v];
      const double bl = luts[b.hi * params.tiles_x + a.lo][v];
      const double br = luts[b.hi * params.tiles_x + a.hi][v];
      const double top = tl * (1.0 - a.w) + tr * a.w;
      const double bot = bl * (1.0 - a.w) + br * a.w;
      out.at(x, y) = to_u8(top * (1.0 - b.w) + bot * b.w);
    }
  }
  return out;
}

}  // namespace dbn::imaging
