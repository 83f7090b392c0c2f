#ifndef NEURACRYPT_PRNG_HPP
#define NEURACRYPT_PRNG_HPP

#include <cmath>
#include <cstdint>

namespace neuracrypt {

// splitmix64 (Steele/Lea/Flood). All key-derived randomness in this project
// flows through this generator so that weight stacks are reproducible from a
// 64-bit seed alone.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform draw on (0,1]: top 53 bits, shifted into (0,1] so log() is safe.
  double next_unit() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

// Stateless finalizer of the same mixing function; used to derive per-sample
// nonces with random access (independent of encode order).
inline std::uint64_t mix64(std::uint64_t v) {
  v += 0x9E3779B97F4A7C15ull;
  v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
  v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
  return v ^ (v >> 31);
}

// Standard normal stream: Box-Muller on consecutive (0,1] uniform pairs.
// Draw order is part of the key format: each pair (u1,u2) yields
// r*cos(2*pi*u2) first, then r*sin(2*pi*u2), with r = sqrt(-2*ln(u1)).
class GaussianStream {
public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.next_unit();
    const double u2 = rng_.next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

private:
  SplitMix64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace neuracrypt

#endif
