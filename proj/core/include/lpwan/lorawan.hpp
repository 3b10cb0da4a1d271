#ifndef LPWAN_LORAWAN_HPP
#define LPWAN_LORAWAN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lpwan/phy.hpp"
#include "lpwan/scenario.hpp"
#include "lpwan/time.hpp"

namespace lpwan::lorawan {

/// EU868-style channel plan: three channels in one 1% band, up to five in
/// a second 1% band, RX2 in the 10% band.
struct ChannelPlan {
  std::vector<std::int64_t> uplink_hz;
  std::int64_t rx2_hz = 869'525'000;
  int rx2_band = 2;

  static ChannelPlan eu868(int uplink_channels);
  int band_of_uplink(int channel_index) const { return channel_index < 3 ? 0 : 1; }
  int band_count() const { return 3; }
};

/// Token bucket enforcing a duty-cycle fraction over a sliding window.
class DutyCycleBucket {
 public:
  DutyCycleBucket() = default;
  DutyCycleBucket(double fraction, double window_s)
      : rate_(fraction), capacity_s_(fraction * window_s), tokens_s_(capacity_s_) {}

  /// Earliest instant >= now at which `airtime` may start.
  TimeInstant earliest_start(TimeInstant now, Duration airtime) const;
  void consume(TimeInstant at, Duration airtime);

 private:
  double refilled_at(TimeInstant t) const;

  double rate_ = 1.0;
  double capacity_s_ = 1e18;
  double tokens_s_ = 1e18;
  TimeInstant last_{};
};

struct EventLogRow {
  TimeInstant t{};
  std::string device;
  std::string event;
  std::int64_t channel_hz = 0;
  std::string outcome;
};

struct QueueDepthSample {
  int actuator = -1;
  TimeInstant t{};
  int depth = 0;
};

}  // namespace lpwan::lorawan

#endif
