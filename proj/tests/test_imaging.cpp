#include <doctest.h>

#include <cmath>
#include <limits>

#include "dbn/error.hpp"
#include "dbn/imaging.hpp"
#include "dbn/rng.hpp"
#include "support/oracles.hpp"

using namespace dbn;
using namespace dbn::imaging;

namespace {

// Straightforward bilinear reference with half-pixel centers.
GrayImage resize_ref(const GrayImage& img, std::size_t w, std::size_t h) {
  GrayImage out(w, h);
  const double sx = double(img.width()) / double(w), sy = double(img.height()) / double(h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(img.width() - 1));
      const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(img.height() - 1));
      const auto x0 = std::size_t(fx), y0 = std::size_t(fy);
      const auto x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
      const double ax = fx - double(x0), ay = fy - double(y0);
      const double top = img.at(x0, y0) * (1 - ax) + img.at(x1, y0) * ax;
      const double bot = img.at(x0, y1) * (1 - ax) + img.at(x1, y1) * ax;
      out.at(x, y) = to_u8(top * (1 - ay) + bot * ay);
    }
  return out;
}

GrayImage step_image(std::size_t w, std::size_t h, std::size_t col, std::uint8_t lo, std::uint8_t hi) {
  GrayImage img(w, h, lo);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = col; x < w; ++x) img.at(x, y) = hi;
  return img;
}

}  // namespace

TEST_CASE("to_u8 rounds half up and clamps") {
  CHECK(to_u8(0.5) == 1);
  CHECK(to_u8(1.49) == 1);
  CHECK(to_u8(-3.0) == 0);
  CHECK(to_u8(254.5) == 255);
  CHECK(to_u8(1e9) == 255);
}

TEST_CASE("resize: identity, constants, and agreement with a reference") {
  Rng rng(3);
  const auto img = oracle::random_image(rng, 17, 11);
  CHECK(resize_bilinear(img, 17, 11) == img);
  CHECK(resize_bilinear(GrayImage(9, 5, std::uint8_t(77)), 31, 2) == GrayImage(31, 2, std::uint8_t(77)));
  for (int i = 0; i < 50; ++i) {
    const auto src = oracle::random_image(rng, 1 + rng.below(30), 1 + rng.below(30));
    const auto w = 1 + rng.below(40), h = 1 + rng.below(40);
    CHECK(resize_bilinear(src, w, h) == resize_ref(src, w, h));
  }
  // Upscaling 2 -> 4 puts samples at -0.25, 0.25, 0.75, 1.25.
  const GrayImage row(2, 1, std::vector<std::uint8_t>{0, 100});
  CHECK(resize_bilinear(row, 4, 1) == GrayImage(4, 1, std::vector<std::uint8_t>{0, 25, 75, 100}));
  CHECK_THROWS_AS(resize_bilinear(row, 0, 1), ConfigError);
}

TEST_CASE("normalize maps to [0, 1]") {
  const auto f = normalize(GrayImage(3, 1, std::vector<std::uint8_t>{0, 51, 255}));
  CHECK(f.data == std::vector<double>{0.0, 0.2, 1.0});
  CHECK(f.channels == 1);
}

TEST_CASE("crop and auto_crop_margins") {
  GrayImage img(6, 5, std::uint8_t(3));
  img.at(2, 1) = 200;
  img.at(4, 3) = 11;
  const auto [cropped, region] = auto_crop_margins(img, 10);
  CHECK(region == CropRegion{2, 1, 5, 4});
  CHECK(cropped.width() == 3);
  CHECK(cropped.height() == 3);
  CHECK(cropped.at(0, 0) == 200);
  CHECK(cropped.at(2, 2) == 11);
  CHECK_THROWS_AS(auto_crop_margins(img, 200), DataError);
  CHECK_THROWS(crop(img, CropRegion{0, 0, 7, 1}));
}

TEST_CASE("box blur") {
  CHECK(box_blur(GrayImage(7, 4, std::uint8_t(90)), 3, 5) == GrayImage(7, 4, std::uint8_t(90)));
  const GrayImage impulse = [] {
    GrayImage g(5, 5, std::uint8_t(0));
    g.at(2, 2) = 90;
    return g;
  }();
  const auto b = box_blur(impulse, 3, 3);
  CHECK(b.at(2, 2) == 10);
  CHECK(b.at(1, 1) == 10);
  CHECK(b.at(0, 0) == 0);
  CHECK(box_blur(impulse, 1, 1) == impulse);
}

TEST_CASE("histogram equalization matches the cdf definition") {
  CHECK(equalize_histogram(GrayImage(2, 2, std::vector<std::uint8_t>{0, 85, 170, 255})) ==
        GrayImage(2, 2, std::vector<std::uint8_t>{64, 128, 191, 255}));
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto img = oracle::random_image(rng, 1 + rng.below(20), 1 + rng.below(20), 1 + rng.below(256));
    const auto eq = equalize_histogram(img);
    const auto ref = oracle::equalize({img.pixels().begin(), img.pixels().end()});
    CHECK(std::equal(eq.pixels().begin(), eq.pixels().end(), ref.begin(), ref.end()));
    const auto lut = equalization_lut(img);
    CHECK(std::is_sorted(lut.begin(), lut.end()));
  }
}

TEST_CASE("CLAHE on a constant image follows the clipped-histogram closed form") {
  for (int v : {0, 10, 41, 42, 100, 200, 255}) {
    const GrayImage img(32, 32, std::uint8_t(v));
    const auto out = clahe(img, {4, 4, 2.0});
    // Single occupied bin of height A clipped to 2A/256, excess spread evenly.
    const double share = (1.0 - 2.0 / 256.0) / 256.0;
    const auto expected = to_u8(255.0 * ((v + 1) * share + 2.0 / 256.0));
    CHECK(out == GrayImage(32, 32, expected));
    if (v >= 42) CHECK(std::abs(int(expected) - v) <= 2);
  }
  CHECK(clahe(GrayImage(16, 16, std::uint8_t(9)), {2, 2, std::numeric_limits<double>::infinity()}) ==
        GrayImage(16, 16, std::uint8_t(255)));
}

TEST_CASE("CLAHE with one tile and no clipping is global equalization") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto img = oracle::random_image(rng, 8 + rng.below(20), 8 + rng.below(20));
    CHECK(clahe(img, {1, 1, std::numeric_limits<double>::infinity()}) == equalize_histogram(img));
  }
}

TEST_CASE("CLAHE rejects bad parameters") {
  const GrayImage img(8, 8, std::uint8_t(1));
  CHECK_THROWS_AS(clahe(img, {0, 1, 2.0}), ConfigError);
  CHECK_THROWS_AS(clahe(img, {9, 1, 2.0}), ConfigError);
  CHECK_THROWS_AS(clahe(img, {2, 2, 0.5}), ConfigError);
}

TEST_CASE("canny: constant, step, shift invariance, errors") {
  CHECK(canny(GrayImage(20, 20, std::uint8_t(128))).count() == 0);
  const auto e = canny(step_image(24, 16, 10, 20, 220));
  CHECK(e.count() > 0);
  for (std::size_t y = 2; y + 2 < 16; ++y) {
    std::size_t n = 0;
    for (std::size_t x = 0; x < 24; ++x)
      if (e.at(x, y)) {
        ++n;
        CHECK((x == 9 || x == 10));
      }
    CHECK(n >= 1);
    CHECK(n <= 2);
  }
  const auto shifted = canny(step_image(24, 16, 13, 20, 220));
  for (std::size_t y = 2; y + 2 < 16; ++y)
    for (std::size_t x = 4; x + 4 < 20; ++x) CHECK(e.at(x, y) == shifted.at(x + 3, y));
  // Brightness offset leaves gradients unchanged.
  CHECK(canny(step_image(24, 16, 10, 30, 230)).data == e.data);
  CHECK(e.to_image().at(10, 8) == 255 * e.at(10, 8));

  CHECK_THROWS_AS(canny(GrayImage(4, 10, std::uint8_t(0))), ConfigError);
  CHECK_THROWS_AS(canny(GrayImage(10, 10, std::uint8_t(0)), {1.4, 150, 50}), ConfigError);
  CHECK_THROWS_AS(canny(GrayImage(10, 10, std::uint8_t(0)), {0.0, 50, 150}), ConfigError);
}

TEST_CASE("augment") {
  Rng rng(1);
  const auto img = oracle::random_image(rng, 20, 16);
  CHECK(augment(img, AugmentParams::none(), 99) == img);
  const AugmentParams p;
  CHECK(augment(img, p, 5) == augment(img, p, 5));
  CHECK(augment(img, p, 5) != augment(img, p, 6));
  const auto a = augment(img, p, 5);
  CHECK(a.width() == 20);
  CHECK(a.height() == 16);

  AugmentParams flip_only = AugmentParams::none();
  flip_only.allow_hflip = true;
  flip_only.flip_probability = 1.0;
  const auto f = augment(img, flip_only, 1);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 20; ++x) CHECK(f.at(x, y) == img.at(19 - x, y));

  AugmentParams bad;
  bad.brightness_min = 2.0;
  CHECK_THROWS_AS(augment(img, bad, 1), ConfigError);
}
