#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dbn::nnet {

struct Shape {
  std::size_t n = 0;  ///< batch
  std::size_t c = 0;  ///< channels
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t size() const { return n * c * h * w; }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// NCHW tensor of doubles.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}
  /// Throws ConfigError if data.size() != shape.size().
  Tensor4(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }
  const double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace dbn::nnet
