// Deterministic seeded RNG streams. Derived streams use a splitmix64-based
// PRF so stream i of a seed is reconstructible without generating streams
// 0..i-1 (independent per-sample generation, reproducible splitting).
#pragma once

#include <cstdint>
#include <random>

#include "weakring/numtypes.hpp"

namespace weakring {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// PRF(seed, a, b): two fixed-key mixing rounds over the tuple.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed ^ 0xA0761D6478BD642Full);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0xE7037ED1A0B428DBull));
  return h;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Unbiased uniform draw from [0, bound) by rejection.
  std::uint64_t uniform_u64(std::uint64_t bound) {
    std::uint64_t lim = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= lim);
    return v % bound;
  }

  BigInt uniform_bigint(const BigInt& bound) {
    if (bound <= (std::numeric_limits<std::uint64_t>::max)()) {
      return BigInt(uniform_u64(static_cast<std::uint64_t>(bound)));
    }
    std::size_t bits = msb(bound) + 1;
    std::size_t words = (bits + 63) / 64;
    for (;;) {
      BigInt v = 0;
      for (std::size_t i = 0; i < words; ++i) {
        v <<= 64;
        v |= BigInt(eng_());
      }
      v >>= (words * 64 - bits);
      if (v < bound) return v;
    }
  }

  // Uniform in [0, 1) with 53 bits of entropy.
  double uniform_double() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace weakring
