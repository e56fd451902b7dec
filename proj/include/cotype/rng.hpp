#pragma once

// Splittable deterministic random generator.  Every randomized routine takes
// a seed and derives independent child streams by index, so results are
// reproducible bit-for-bit regardless of evaluation order or worker count.

#include <cmath>
#include <cstdint>

namespace cotype {

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed = 0) : state_(seed) {}

  // Independent child stream; deterministic in (parent seed, index).
  SplitRng split(std::uint64_t index) const {
    return SplitRng(mix(state_ ^ (0xA0761D6478BD642Full * (index + 1))));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;  // golden-ratio increment (splitmix64)
    return mix(state_);
  }

  // Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a logarithm argument.
  double next_unit_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller (spare value intentionally discarded so a
  // draw always consumes exactly two uniforms).
  double next_normal() {
    const double u1 = next_unit_pos();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace cotype
