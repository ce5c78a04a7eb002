#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "dbn/image.hpp"

namespace dbn::imaging {

/// Real-valued raster, row-major, channel-planar.
struct FeatureMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<double> data;
};

/// Half-open pixel rectangle [x_start, x_end) x [y_start, y_end).
struct CropRegion {
  std::size_t x_start = 0;
  std::size_t y_start = 0;
  std::size_t x_end = 0;
  std::size_t y_end = 0;

  std::size_t width() const { return x_end - x_start; }
  std::size_t height() const { return y_end - y_start; }
  friend bool operator==(const CropRegion&, const CropRegion&) = default;
};

struct AugmentParams {
  double rotation_range = 30.0;  ///< degrees, symmetric
  bool allow_hflip = true;
  bool allow_vflip = true;
  double flip_probability = 0.5;  ///< per enabled flip axis
  double zoom_range = 0.1;        ///< scale drawn from [1 - z, 1 + z]
  double shift_range = 0.1;       ///< fraction of width / height
  double shear_range = 10.0;      ///< degrees, symmetric
  double brightness_min = 0.8;
  double brightness_max = 1.2;

  /// Everything off: augment() returns its input unchanged.
  static AugmentParams none();
  void validate() const;
};

struct ClaheParams {
  std::size_t tiles_x = 8;
  std::size_t tiles_y = 8;
  /// Multiple of the uniform bin height (tile_pixels / 256). Infinity
  /// disables clipping.
  double clip_limit = 2.0;
};

struct CannyParams {
  double gaussian_sigma = 1.4;
  double low_threshold = 50.0;   ///< on the 8-bit gradient-magnitude scale
  double high_threshold = 150.0;
};

/// Binary edge mask, values in {0, 1}.
struct EdgeMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t at(std::size_t x, std::size_t y) const { return data[y * width + x]; }
  std::size_t count() const;
  /// Edge pixels as 255 for export.
  GrayImage to_image() const;
};

/// Bilinear resampling with half-pixel centers:
/// src = (dst + 0.5) * (src_size / dst_size) - 0.5, clamped to the image.
GrayImage resize_bilinear(const GrayImage& image, std::size_t new_w, std::size_t new_h);

/// Each pixel divided by 255.
FeatureMap normalize(const GrayImage& image);

GrayImage crop(const GrayImage& image, const CropRegion& region);

/// Tight bounding box of pixels strictly above `background_threshold`.
std::pair<GrayImage, CropRegion> auto_crop_margins(const GrayImage& image, std::uint8_t background_threshold);

/// Centered m x n mean filter (m along x, n along y), replicate border.
GrayImage box_blur(const GrayImage& image, std::size_t m, std::size_t n);

/// Global histogram equalization, T(r_k) = round(255 / (M N) * cdf(r_k)).
GrayImage equalize_histogram(const GrayImage& image);
/// The 256-entry mapping used by equalize_histogram.
std::vector<std::uint8_t> equalization_lut(const GrayImage& image);

GrayImage clahe(const GrayImage& image, const ClaheParams& params = {});

EdgeMap canny(const GrayImage& image, const CannyParams& params = {});

/// Random affine (rotation, flips, zoom, shear, shift about the image
/// center) resampled bilinearly with fill 0, then brightness scaling.
GrayImage augment(const GrayImage& image, const AugmentParams& params, std::uint64_t seed);

}  // namespace dbn::imaging
