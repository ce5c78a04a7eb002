#include <algorithm>
#include <cmath>
#include <string>

#include "dbn/error.hpp"
#include "dbn/imaging.hpp"

namespace dbn::imaging {

namespace {

struct Tap {
  std::size_t i0;
  std::size_t i1;
  double frac;
};

// Precomputed source taps for one axis under the half-pixel convention.
std::vector<Tap> axis_taps(std::size_t src, std::size_t dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  const double max_coord = static_cast<double>(src - 1);
  for (std::size_t d = 0; d < dst; ++d) {
    double s = (static_cast<double>(d) + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, max_coord);
    const auto i0 = static_cast<std::size_t>(std::floor(s));
    const std::size_t i1 = std::min(i0 + 1, src - 1);
    taps[d] = {i0, i1, s - static_cast<double>(i0)};
  }
  return taps;
}

}  // namespace

GrayImage resize_bilinear(const GrayImage& image, std::size_t new_w, std::size_t new_h) {
  if (new_w == 0 || new_h == 0) throw ConfigError("resize_bilinear: zero target dimension");
  if (new_w == image.width() && new_h == image.height()) return image;

  const auto xt = axis_taps(image.width(), new_w);
  const auto yt = axis_taps(image.height(), new_h);
  GrayImage out(new_w, new_h);
  for (std::size_t y = 0; y < new_h; ++y) {
    const auto& ty = yt[y];
    for (std::size_t x = 0; x < new_w; ++x) {
      const auto& tx = xt[x];
      const double top = image.at(tx.i0, ty.i0) * (1.0 - tx.frac) + image.at(tx.i1, ty.i0) * tx.frac;
      const double bot = image.at(tx.i0, ty.i1) * (1.0 - tx.frac) + image.at(tx.i1, ty.i1) * tx.frac;
      out.at(x, y) = to_u8(top * (1.0 - ty.frac) + bot * ty.frac);
    }
  }
  return out;
}

FeatureMap normalize(const GrayImage& image) {
  FeatureMap fm{image.width(), image.height(), 1, {}};
  fm.data.reserve(image.size());
  for (auto p : image.pixels()) fm.data.push_back(static_cast<double>(p) / 255.0);
  return fm;
}

GrayImage crop(const GrayImage& image, const CropRegion& r) {
  if (!(r.x_start < r.x_end && r.x_end <= image.width() && r.y_start < r.y_end && r.y_end <= image.height()))
    throw ConfigError("crop: region (" + std::to_string(r.x_start) + "," + std::to_string(r.y_start) + ")-(" +
                      std::to_string(r.x_end) + "," + std::to_string(r.y_end) + ") invalid for " +
                      std::to_string(image.width()) + "x" + std::to_string(image.height()));
  GrayImage out(r.width(), r.height());
  for (std::size_t y = 0; y < r.height(); ++y)
    for (std::size_t x = 0; x < r.width(); ++x) out.at(x, y) = image.at(r.x_start + x, r.y_start + y);
  return out;
}

std::pair<GrayImage, CropRegion> auto_crop_margins(const GrayImage& image, std::uint8_t background_threshold) {
  CropRegion r{image.width(), image.height(), 0, 0};
  bool any = false;
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      if (image.at(x, y) <= background_threshold) continue;
      any = true;
      r.x_start = std::min(r.x_start, x);
      r.y_start = std::min(r.y_start, y);
      r.x_end = std::max(r.x_end, x + 1);
      r.y_end = std::max(r.y_end, y + 1);
    }
  }
  if (!any) throw DataError("auto_crop_margins: no pixel above threshold " + std::to_string(background_threshold));
  return {crop(image, r), r};
}

}  // namespace dbn::imaging
