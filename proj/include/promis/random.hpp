#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace promis {

/// Counter-based normal deviates: every draw is a pure function of its key, so results
/// do not depend on evaluation order or on how work is split across threads.
class CounterRng {
 public:
  explicit CounterRng(std::initializer_list<std::uint64_t> key) {
    for (auto k : key) state_ = mix(state_ ^ (k + 0x9e3779b97f4a7c15ULL));
  }

  /// Uniform in (0, 1) for the given draw counter.
  double uniform(std::uint64_t counter) const {
    const std::uint64_t bits = mix(state_ + counter * 0xd1b54a32d192ed03ULL) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on counters 2c and 2c+1.
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(std::uint64_t counter, double mean, double stddev) const {
    return mean + stddev * normal(counter);
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0x6a09e667f3bcc909ULL;
};

}  // namespace promis
