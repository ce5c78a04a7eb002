#include "dbn/image.hpp"

#include <cmath>
#include <string>

#include "dbn/error.hpp"

namespace dbn {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) throw ConfigError("GrayImage: zero dimension");
  data_.assign(width * height, fill);
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width == 0 || height == 0) throw ConfigError("GrayImage: zero dimension");
  if (data_.size() != width * height)
    throw ConfigError("GrayImage: data length " + std::to_string(data_.size()) +
                      " != " + std::to_string(width) + "x" + std::to_string(height));
}

RgbImage::RgbImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width == 0 || height == 0) throw ConfigError("RgbImage: zero dimension");
  if (data_.size() != 3 * width * height) throw ConfigError("RgbImage: data length mismatch");
}

std::uint8_t to_u8(double v) {
  const double r = std::floor(v + 0.5);
  if (!(r > 0.0)) return 0;  // also maps NaN to 0
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

}  // namespace dbn
