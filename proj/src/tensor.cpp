#include "has/tensor.hpp"

#include <cmath>
#include <string>

#include "has/error.hpp"

namespace has {

namespace {

void check_finite(std::span<const float> data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ValidationError("non-finite tensor value at flat index " + std::to_string(i));
    }
  }
}

}  // namespace

Tensor3::Tensor3(int height, int width, int channels, float value)
    : height_(height), width_(width), channels_(channels) {
  require(height > 0 && width > 0 && channels > 0, "tensor dimensions must be positive");
  require(std::isfinite(value), "tensor fill value must be finite");
  data_.assign(static_cast<std::size_t>(height) * width * channels, value);
}

Tensor3 Tensor3::from_data(int height, int width, int channels, std::vector<float> data) {
  Tensor3 t(height, width, channels);
  require(data.size() == t.data_.size(),
          "tensor data length " + std::to_string(data.size()) + " does not match H*W*C = " +
              std::to_string(t.data_.size()));
  check_finite(data);
  t.data_ = std::move(data);
  return t;
}

Tensor1::Tensor1(int length, int channels, float value) : length_(length), channels_(channels) {
  require(length > 0 && channels > 0, "sequence dimensions must be positive");
  require(std::isfinite(value), "sequence fill value must be finite");
  data_.assign(static_cast<std::size_t>(length) * channels, value);
}

Tensor1 Tensor1::from_data(int length, int channels, std::vector<float> data) {
  Tensor1 t(length, channels);
  require(data.size() == t.data_.size(),
          "sequence data length " + std::to_string(data.size()) + " does not match T*C = " +
              std::to_string(t.data_.size()));
  check_finite(data);
  t.data_ = std::move(data);
  return t;
}

}  // namespace has
