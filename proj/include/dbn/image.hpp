#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dbn {

/// 8-bit single-channel raster, row-major, origin top-left.
class GrayImage {
 public:
  GrayImage() = default;
  /// Filled with `fill`. Throws ConfigError on a zero dimension.
  GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
  /// Takes ownership of `data`; throws ConfigError unless
  /// data.size() == width * height and both dimensions are nonzero.
  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::uint8_t at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }

  std::span<const std::uint8_t> pixels() const { return data_; }
  std::span<std::uint8_t> pixels() { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// 8-bit interleaved RGB raster (r, g, b per pixel), row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::span<const std::uint8_t> bytes() const { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Rounds half-up then clamps to [0, 255]. Every float-to-8-bit conversion
/// in the library goes through this.
std::uint8_t to_u8(double v);

}  // namespace dbn
