#pragma once

#include <cstdint>

namespace mlab {

/// SplitMix64 output finalizer. Bit-exact on every platform.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

/// Signed to unsigned interleaving: 0, -1, 1, -2, ... -> 0, 1, 2, 3, ...
constexpr std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

/// Counter-based stream: word n of lane l under seed s is
/// mix64(mix64(s) ^ mix64(l) ^ n). Distinct lanes are independent streams;
/// any word can be computed without generating its predecessors.
class RandomStream {
 public:
  constexpr RandomStream(std::uint64_t seed, std::uint64_t lane, std::uint64_t counter = 0)
      : key_(mix64(seed) ^ mix64(lane)), seed_(seed), lane_(lane), counter_(counter) {}

  constexpr std::uint64_t seed() const { return seed_; }
  constexpr std::uint64_t lane() const { return lane_; }
  constexpr std::uint64_t counter() const { return counter_; }

  /// Word at the current counter, without advancing.
  constexpr std::uint64_t peek_u64() const { return mix64(key_ ^ counter_); }

  constexpr std::uint64_t next_u64() {
    const std::uint64_t word = peek_u64();
    ++counter_;
    return word;
  }

  /// Top 53 bits of the next word divided by 2^53; in [0, 1).
  constexpr double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two words, returns both variates.
  struct NormalPair {
    double first;
    double second;
  };
  NormalPair normal_pair();

 private:
  std::uint64_t key_;
  std::uint64_t seed_;
  std::uint64_t lane_;
  std::uint64_t counter_;
};

}  // namespace mlab
