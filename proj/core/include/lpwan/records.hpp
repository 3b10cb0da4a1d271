#ifndef LPWAN_RECORDS_HPP
#define LPWAN_RECORDS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpwan/time.hpp"

namespace lpwan {

enum class LossCause {
  QueueDrop,
  UplinkCollision,
  GatewayBusy,
  DownlinkLoss,
  Deadline,
};

std::string to_string(LossCause cause);

/// Per-application-packet ledger. A record that ends the run with neither
/// a delivery time nor a loss cause was still in flight when the scenario
/// ended and is excluded from ratio denominators.
struct PacketRecord {
  int flow = -1;
  TimeInstant scheduled{};
  std::vector<std::pair<TimeInstant, Duration>> uplink_airtimes;
  std::optional<TimeInstant> extracted;  // uplink decoded by the infrastructure
  std::optional<TimeInstant> delivered;  // end-to-end reception at the actuator
  std::optional<LossCause> loss;
  // DSME only: start of the GTS occurrence that served the frame.
  std::optional<TimeInstant> service_slot;

  bool completed() const { return delivered.has_value() || loss.has_value(); }
  bool in_flight() const { return !completed(); }
};

enum class RadioState { Tx, Rx, Sleep };

std::string to_string(RadioState state);

struct RadioStateInterval {
  int device = -1;
  RadioState state = RadioState::Sleep;
  TimeInstant start{};
  TimeInstant end{};
};

/// Turns possibly-overlapping tx/rx primitives into a per-device tiling of
/// [0, duration] with no gaps or overlaps. Tx wins over rx where they
/// overlap; remaining gaps become `gap_state` (sleep, or rx for devices
/// that listen continuously).
std::vector<RadioStateInterval> tile_radio_intervals(
    int device, std::vector<RadioStateInterval> primitives, Duration run_duration,
    RadioState gap_state = RadioState::Sleep);

}  // namespace lpwan

#endif
