#pragma once

// Counter-based SplitMix64. Output i of the stream keyed by k is
// mix(k + (i + 1) * gamma), so any position is reachable in O(1) and
// records can be generated in any order or shard layout.

#include <cstdint>
#include <string_view>

namespace causelab {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a master seed and a stream tag.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed + kGoldenGamma) ^ mix64(tag * kGoldenGamma + 0x632BE59BD9B4E019ull));
}

/// FNV-1a of a label, for naming streams.
constexpr std::uint64_t tag_of(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ull;
  }
  return h;
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t key, std::uint64_t position)
      : state_(key + position * kGoldenGamma) {}
  explicit constexpr CounterRng(std::uint64_t seed) : CounterRng(seed, 0) {}

  constexpr std::uint64_t next() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }
  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  constexpr bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n) by rejection (unbiased), n > 0.
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace causelab
