#include "has/stats.hpp"

#include <string>

#include "has/error.hpp"

namespace has {

DatasetMean::DatasetMean(int channels) {
  require(channels > 0, "dataset mean needs at least one channel");
  sums_.assign(static_cast<std::size_t>(channels), 0.0);
}

void DatasetMean::add(std::span<const float> values, std::uint64_t positions) {
  const std::size_t c = sums_.size();
  for (std::size_t i = 0; i < values.size(); ++i) sums_[i % c] += values[i];
  count_ += positions;
}

DatasetMean& DatasetMean::accumulate(const Tensor3& t) {
  require(t.channels() == channels(), "channel mismatch: tensor has " + std::to_string(t.channels()) +
                                          ", accumulator has " + std::to_string(channels()));
  add(t.data(), t.pixel_count());
  return *this;
}

DatasetMean& DatasetMean::accumulate(const Tensor1& t) {
  require(t.channels() == channels(), "channel mismatch: sequence has " + std::to_string(t.channels()) +
                                          ", accumulator has " + std::to_string(channels()));
  add(t.data(), static_cast<std::uint64_t>(t.length()));
  return *this;
}

DatasetMean& DatasetMean::merge(const DatasetMean& other) {
  require(other.channels() == channels(), "channel mismatch in merge");
  for (std::size_t c = 0; c < sums_.size(); ++c) sums_[c] += other.sums_[c];
  count_ += other.count_;
  return *this;
}

std::vector<float> DatasetMean::finalize() const {
  require(count_ > 0, "dataset mean is empty");
  std::vector<float> mean(sums_.size());
  for (std::size_t c = 0; c < sums_.size(); ++c) {
    mean[c] = static_cast<float>(sums_[c] / static_cast<double>(count_));
  }
  return mean;
}

DatasetMean DatasetMean::from_mean(std::span<const float> mean, std::uint64_t pixel_count) {
  DatasetMean m(static_cast<int>(mean.size()));
  for (std::size_t c = 0; c < mean.size(); ++c) m.sums_[c] = static_cast<double>(mean[c]) * pixel_count;
  m.count_ = pixel_count;
  return m;
}

DatasetMean merge(DatasetMean a, const DatasetMean& b) { return std::move(a.merge(b)); }

}  // namespace has
