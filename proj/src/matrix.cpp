#include "dbn/matrix.hpp"

#include "dbn/error.hpp"

namespace dbn {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw ConfigError("Matrix: data length does not match shape");
}

}  // namespace dbn
