#pragma once

#include <cstdint>
#include <random>

namespace shipbow {

/// Seeded generator whose streams are identical across standard libraries:
/// std::mt19937_64 output is fully specified, and the helpers below avoid the
/// implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n), n >= 1.
  std::uint64_t index(std::uint64_t n) {
    // Rejection sampling keeps the result unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return v % n;
  }

  double normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
};

}  // namespace shipbow
