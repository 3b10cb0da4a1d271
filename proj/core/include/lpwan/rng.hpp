#ifndef LPWAN_RNG_HPP
#define LPWAN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "lpwan/time.hpp"

namespace lpwan {

/// Deterministic random stream keyed by (seed, stream_id).
///
/// SplitMix64 with the stream id folded into the initial state. Identical
/// (seed, stream_id) pairs produce identical draw sequences on every
/// platform; distinct stream ids decorrelate through two finalizer rounds.
/// Variates are derived from the raw 64-bit output directly instead of
/// <random> distributions, whose mapping is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : state_(mix(mix(seed) ^ mix(stream_id ^ 0x5851f42d4c957f2dULL))) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 significant bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
    return next_u64() % n;  // modulo bias is negligible for n << 2^64
  }

  /// Uniform duration on the integer microsecond grid [lo, hi], inclusive.
  Duration uniform_duration(Duration lo, Duration hi) {
    if (hi < lo) throw std::invalid_argument("uniform_duration: hi < lo");
    const std::uint64_t span = static_cast<std::uint64_t>((hi - lo).count()) + 1;
    return lo + Duration{static_cast<std::int64_t>(uniform_int(span))};
  }

  /// Exponential duration with the given mean, rounded to microseconds.
  Duration exponential(Duration mean) {
    const double u = uniform01();
    const double v = -std::log1p(-u) * as_seconds(mean);
    return duration_from_seconds(v);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace lpwan

#endif
