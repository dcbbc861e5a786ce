#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace has {

/// Dense H x W x C float image or feature map, channels-last:
/// element (y, x, c) lives at (y * W + x) * C + c.
class Tensor3 {
 public:
  /// Zero-initialized (or constant) tensor. Dimensions must be positive.
  Tensor3(int height, int width, int channels, float value = 0.0f);

  /// Takes ownership of `data`; throws ValidationError on a size mismatch or
  /// a non-finite value.
  static Tensor3 from_data(int height, int width, int channels, std::vector<float> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }

  float& at(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  float at(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }

  std::span<float> pixel(int y, int x) {
    return {data_.data() + index(y, x, 0), static_cast<std::size_t>(channels_)};
  }
  std::span<const float> pixel(int y, int x) const {
    return {data_.data() + index(y, x, 0), static_cast<std::size_t>(channels_)};
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool operator==(const Tensor3&) const = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_;
  int width_;
  int channels_;
  std::vector<float> data_;
};

/// T x C sequence (time-major): element (t, c) lives at t * C + c.
class Tensor1 {
 public:
  Tensor1(int length, int channels, float value = 0.0f);
  static Tensor1 from_data(int length, int channels, std::vector<float> data);

  int length() const { return length_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  float& at(int t, int c = 0) { return data_[static_cast<std::size_t>(t) * channels_ + c]; }
  float at(int t, int c = 0) const { return data_[static_cast<std::size_t>(t) * channels_ + c]; }

  std::span<float> step(int t) {
    return {data_.data() + static_cast<std::size_t>(t) * channels_, static_cast<std::size_t>(channels_)};
  }
  std::span<const float> step(int t) const {
    return {data_.data() + static_cast<std::size_t>(t) * channels_, static_cast<std::size_t>(channels_)};
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool operator==(const Tensor1&) const = default;

 private:
  int length_;
  int channels_;
  std::vector<float> data_;
};

}  // namespace has
