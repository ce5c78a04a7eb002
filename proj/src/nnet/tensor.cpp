#include "dbn/nnet/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "dbn/error.hpp"

namespace dbn::nnet {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
}

Tensor4::Tensor4(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size())
    throw ConfigError("Tensor4: " + std::to_string(data_.size()) + " values for shape " + shape_.str());
}

bool Tensor4::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace dbn::nnet
