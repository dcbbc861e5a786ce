#include "has/rng.hpp"

#include "has/error.hpp"

namespace has {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kEpochSalt = 0xC2B2AE3D27D4EB4FULL;
constexpr std::uint64_t kSeedSalt = 0x632BE59BD9B4E019ULL;
constexpr std::uint64_t kChildSalt = 0xD6E8FEB86659FD93ULL;

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngKey RngKey::child(std::uint64_t tag) const {
  return {global_seed, mix64(stream_id ^ mix64(tag + kChildSalt))};
}

RngKey derive_stream(std::uint64_t global_seed, std::uint64_t sample_index, std::uint64_t epoch) {
  const std::uint64_t a = mix64(sample_index + kGolden);
  return {global_seed, mix64(a ^ mix64(epoch + kEpochSalt))};
}

Rng::Rng(const RngKey& key) {
  std::uint64_t sm = key.global_seed ^ mix64(key.stream_id + kSeedSalt);
  for (auto& word : s_) {
    sm += kGolden;
    word = mix64(sm);
  }
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  return lo + (hi - lo) * uniform01();
}

bool Rng::bernoulli(double p) { return uniform01() < p; }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  require(n > 0, "uniform_index needs a positive bound");
  // Reject the low 2^64 mod n values so every residue is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

}  // namespace has
