#include <cmath>
#include <numbers>

#include "dbn/error.hpp"
#include "dbn/imaging.hpp"
#include "dbn/rng.hpp"

namespace dbn::imaging {

AugmentParams AugmentParams::none() {
  AugmentParams p;
  p.rotation_range = 0.0;
  p.allow_hflip = false;
  p.allow_vflip = false;
  p.zoom_range = 0.0;
  p.shift_range = 0.0;
  p.shear_range = 0.0;
  p.brightness_min = 1.0;
  p.brightness_max = 1.0;
  return p;
}

void AugmentParams::validate() const {
  if (rotation_range < 0 || zoom_range < 0 || shift_range < 0 || shear_range < 0)
    throw ConfigError("augment: ranges must be non-negative");
  if (zoom_range >= 1.0) throw ConfigError("augment: zoom_range must be < 1");
  if (!(flip_probability >= 0.0 && flip_probability <= 1.0))
    throw ConfigError("augment: flip_probability must lie in [0, 1]");
  if (!(brightness_min > 0.0 && brightness_min <= brightness_max))
    throw ConfigError("augment: need 0 < brightness_min <= brightness_max");
}

namespace {

struct Affine {
  // Row-major 2x2 linear part.
  double a = 1, b = 0, c = 0, d = 1;

  Affine operator*(const Affine& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  bool identity() const { return a == 1 && b == 0 && c == 0 && d == 1; }
};

double sample_fill0(const GrayImage& img, double sx, double sy) {
  const double fx0 = std::floor(sx);
  const double fy0 = std::floor(sy);
  const double fx = sx - fx0;
  const double fy = sy - fy0;
  const auto x0 = static_cast<std::ptrdiff_t>(fx0);
  const auto y0 = static_cast<std::ptrdiff_t>(fy0);
  auto px = [&](std::ptrdiff_t x, std::ptrdiff_t y) -> double {
    if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(img.width()) ||
        y >= static_cast<std::ptrdiff_t>(img.height()))
      return 0.0;
    return img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
  };
  const double top = px(x0, y0) * (1.0 - fx) + (fx > 0.0 ? px(x0 + 1, y0) * fx : 0.0);
  const double bot = fy > 0.0 ? px(x0, y0 + 1) * (1.0 - fx) + (fx > 0.0 ? px(x0 + 1, y0 + 1) * fx : 0.0) : 0.0;
  return top * (1.0 - fy) + bot * fy;
}

}  // namespace

GrayImage augment(const GrayImage& image, const AugmentParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  constexpr double deg = std::numbers::pi / 180.0;

  // One draw per enabled category, in a fixed order.
  const double theta = params.rotation_range > 0 ? rng.uniform(-params.rotation_range, params.rotation_range) * deg : 0.0;
  const bool hflip = params.allow_hflip && rng.chance(params.flip_probability);
  const bool vflip = params.allow_vflip && rng.chance(params.flip_probability);
  const double zoom = params.zoom_range > 0 ? rng.uniform(1.0 - params.zoom_range, 1.0 + params.zoom_range) : 1.0;
  double tx = 0.0, ty = 0.0;
  if (params.shift_range > 0) {
    tx = rng.uniform(-params.shift_range, params.shift_range) * static_cast<double>(image.width());
    ty = rng.uniform(-params.shift_range, params.shift_range) * static_cast<double>(image.height());
  }
  const double shear = params.shear_range > 0 ? rng.uniform(-params.shear_range, params.shear_range) * deg : 0.0;
  const double bright = params.brightness_max > params.brightness_min
                            ? rng.uniform(params.brightness_min, params.brightness_max)
                            : params.brightness_min;

  // Forward map about the image center: p' = c + t + R * Sh * Z * F * (p - c).
  Affine fwd;
  if (theta != 0.0) fwd = fwd * Affine{std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)};
  if (shear != 0.0) fwd = fwd * Affine{1.0, std::tan(shear), 0.0, 1.0};
  if (zoom != 1.0) fwd = fwd * Affine{zoom, 0.0, 0.0, zoom};
  if (hflip || vflip) fwd = fwd * Affine{hflip ? -1.0 : 1.0, 0.0, 0.0, vflip ? -1.0 : 1.0};

  GrayImage out = image;
  if (!fwd.identity() || tx != 0.0 || ty != 0.0) {
    const double det = fwd.a * fwd.d - fwd.b * fwd.c;
    const Affine inv{fwd.d / det, -fwd.b / det, -fwd.c / det, fwd.a / det};
    const double cx = (static_cast<double>(image.width()) - 1.0) / 2.0;
    const double cy = (static_cast<double>(image.height()) - 1.0) / 2.0;
    for (std::size_t y = 0; y < image.height(); ++y)
      for (std::size_t x = 0; x < image.width(); ++x) {
        const double qx = static_cast<double>(x) - cx - tx;
        const double qy = static_cast<double>(y) - cy - ty;
        const double sx = cx + inv.a * qx + inv.b * qy;
        const double sy = cy + inv.c * qx + inv.d * qy;
        out.at(x, y) = to_u8(sample_fill0(image, sx, sy));
      }
  }
  if (bright != 1.0)
    for (auto& p : out.pixels()) p = to_u8(p * bright);
  return out;
}

}  // namespace dbn::imaging
