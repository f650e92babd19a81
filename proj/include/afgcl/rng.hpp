#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace afgcl {

/// Counter-based splittable PRNG (splitmix64 finalizer over key + counter).
///
/// Every consumer forks its own stream from a single 64-bit root seed, so
/// results never depend on how calls interleave across modules. Output is
/// identical on every platform with 64-bit integers and IEEE doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x243f6a8885a308d3ULL)) {}

  std::uint64_t next_u64() {
    return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
  }

  /// Independent stream derived from this one; forks of forks are fine.
  /// The fork depends only on (key, stream), not on how many numbers the
  /// parent has produced.
  Rng fork(std::uint64_t stream) const {
    return Rng(mix(key_ ^ mix(stream + 0x452821e638d01377ULL)), RawKey{});
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Unbiased uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::uniform_int: n must be > 0");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  struct RawKey {};
  Rng(std::uint64_t key, RawKey) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace afgcl
