#pragma once

#include <array>
#include <cstdint>

namespace has {

/// Identifies one reproducible random stream. Two keys that compare equal
/// always produce the same sequence, on every platform.
struct RngKey {
  std::uint64_t global_seed = 0;
  std::uint64_t stream_id = 0;

  /// Deterministic sub-stream, e.g. for the mask drawn after a mixed-policy
  /// size choice. Children with different tags are unrelated streams.
  RngKey child(std::uint64_t tag) const;

  bool operator==(const RngKey&) const = default;
};

/// SplitMix64 output finalizer (Stafford variant 13).
std::uint64_t mix64(std::uint64_t x);

/// Stream for one training sample in one epoch.
RngKey derive_stream(std::uint64_t global_seed, std::uint64_t sample_index, std::uint64_t epoch);

/// xoshiro256** seeded from a RngKey through SplitMix64.
class Rng {
 public:
  explicit Rng(const RngKey& key);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform double in [lo, hi]; returns lo when lo == hi.
  double uniform(double lo, double hi);
  /// True with probability p; p <= 0 never fires, p >= 1 always does.
  bool bernoulli(double p);
  /// Unbiased integer in [0, n), n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace has
