#pragma once

#include <cmath>
#include <cstdint>

#include "qburst/vec.hpp"

namespace qburst {

// Counter-based pseudo-random stream. The state walks a fixed odd increment
// and every output is a finalizer hash of the state (splitmix64), so a
// stream is fully determined by (seed, stream_id, salt). Per-event streams
// can therefore be created in any order on any thread with identical
// results, which is what makes parallel runs bitwise-reproducible.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t salt = 0) {
    state_ = mix(seed ^ 0x8c98d1614d441413ull);
    state_ ^= mix(stream_id + 0x9e3779b97f4a7c15ull);
    state_ ^= mix(salt * 0xff51afd7ed558ccdull + 0x2545f4914f6cdd1dull);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased integer in [0, n)
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // standard normal, Box-Muller (explicit so results are portable)
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

  Vec3 isotropic_direction() {
    const double c = uniform(-1.0, 1.0);
    const double s = std::sqrt(1.0 - c * c);
    const double phi = uniform(0.0, 2.0 * M_PI);
    return {s * std::cos(phi), s * std::sin(phi), c};
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Salts separating the independent random purposes of one event.
namespace rng_salt {
inline constexpr std::uint64_t event_body = 1;
inline constexpr std::uint64_t event_time = 2;
inline constexpr std::uint64_t event_species = 3;
inline constexpr std::uint64_t pair_creation = 4;
inline constexpr std::uint64_t transport = 5;
inline constexpr std::uint64_t measurement = 6;
inline constexpr std::uint64_t dipole = 7;
inline constexpr std::uint64_t cycle_noise = 8;
}  // namespace rng_salt

}  // namespace qburst
