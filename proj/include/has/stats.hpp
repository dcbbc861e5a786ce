#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "has/tensor.hpp"

namespace has {

/// Streaming per-channel mean of raw stored values over a whole dataset.
/// Sums are kept in double; finalize() emits float.
class DatasetMean {
 public:
  explicit DatasetMean(int channels);

  int channels() const { return static_cast<int>(sums_.size()); }
  std::uint64_t pixel_count() const { return count_; }
  std::span<const double> channel_sums() const { return sums_; }

  /// Adds every spatial position (H*W, or T for sequences).
  DatasetMean& accumulate(const Tensor3& t);
  DatasetMean& accumulate(const Tensor1& t);
  DatasetMean& merge(const DatasetMean& other);

  /// Per-channel mean; throws ValidationError when nothing was accumulated.
  std::vector<float> finalize() const;

  /// Rebuilds an accumulator from a persisted mean vector and pixel count.
  static DatasetMean from_mean(std::span<const float> mean, std::uint64_t pixel_count);

 private:
  void add(std::span<const float> values, std::uint64_t positions);

  std::vector<double> sums_;
  std::uint64_t count_ = 0;
};

DatasetMean merge(DatasetMean a, const DatasetMean& b);

}  // namespace has
