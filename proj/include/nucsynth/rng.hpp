#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nucsynth {

/// Seeded generator with hand-rolled distributions. The standard library
/// leaves uniform_real/normal_distribution output implementation-defined, so
/// sampling is done here directly on mt19937_64 words; identical seeds give
/// identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_word() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double canonical() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }

  /// Uniform integer in [lo, hi], both ends inclusive. Unbiased by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full 2^64 range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t word;
    do {
      word = engine_();
    } while (word >= limit);
    return lo + static_cast<std::int64_t>(word % span);
  }

  /// Box-Muller; one draw per call.
  double gaussian(double mean, double stddev) {
    double u1 = canonical();
    while (u1 <= 0.0) u1 = canonical();
    const double u2 = canonical();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return mean + stddev * radius * std::cos(two_pi * u2);
  }

  /// Stable per-item seed derivation (splitmix64 finalizer over base ^ index).
  static std::uint64_t derive(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nucsynth
