#pragma once

// Platform-independent random streams. The standard distributions are not
// specified bit-for-bit, so uniforms and normals are derived from raw 64-bit
// words here.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace adrc {

constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed for an independent sub-stream, e.g. one per trial.
constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(SplitMix64(seed) ^ SplitMix64(stream + 0x632BE59BD9B4E019ull));
}

/// In (0, 1): never returns exactly 0, so it is safe under log().
constexpr double ToUnit(std::uint64_t word) {
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return SplitMix64(state_);
  }
  double Uniform() { return ToUnit(Next()); }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  bool Coin() { return (Next() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

/// Standard normal draw number `counter` of stream `seed` (Box-Muller).
inline double CounterGaussian(std::uint64_t seed, std::uint64_t counter) {
  const double u1 = ToUnit(DeriveSeed(seed, 2 * counter));
  const double u2 = ToUnit(DeriveSeed(seed, 2 * counter + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace adrc
