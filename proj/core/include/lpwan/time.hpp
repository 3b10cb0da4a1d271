#ifndef LPWAN_TIME_HPP
#define LPWAN_TIME_HPP

#include <chrono>
#include <cmath>
#include <cstdint>

namespace lpwan {

/// Simulated time is kept in integer microseconds so that event ordering
/// never depends on floating point.
using Duration = std::chrono::microseconds;

struct SimClock {
  using rep = std::int64_t;
  using period = std::micro;
  using duration = Duration;
  using time_point = std::chrono::time_point<SimClock, Duration>;
  static constexpr bool is_steady = true;
};

/// Microseconds since simulation start.
using TimeInstant = SimClock::time_point;

inline constexpr TimeInstant sim_start{Duration{0}};

inline constexpr std::int64_t as_us(TimeInstant t) { return t.time_since_epoch().count(); }
inline constexpr std::int64_t as_us(Duration d) { return d.count(); }

inline constexpr double as_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-6; }
inline constexpr double as_seconds(TimeInstant t) { return as_seconds(t.time_since_epoch()); }

inline Duration duration_from_seconds(double s) {
  return Duration{static_cast<std::int64_t>(std::llround(s * 1e6))};
}

}  // namespace lpwan

#endif
