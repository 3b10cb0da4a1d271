#ifndef LPWAN_PHY_HPP
#define LPWAN_PHY_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "lpwan/time.hpp"

namespace lpwan::phy {

/// LoRa modem settings. Defaults correspond to EU868 datarate 5 (SF7BW125).
struct PhyParams {
  int spreading_factor = 7;       // 7..12
  int bandwidth_hz = 125000;      // 125k / 250k / 500k
  int coding_rate = 1;            // 4/(4+cr), cr in 1..4
  int preamble_symbols = 8;
  bool explicit_header = true;
  bool crc_on = true;
  bool low_datarate_optimize = false;
};

/// Duration of one LoRa symbol (2^SF / BW), exact in microseconds.
Duration symbol_time(const PhyParams& phy);

/// Time on air of a frame with the given PHY payload size (0..255 bytes).
/// Preamble time plus payload symbol count times symbol time.
Duration time_on_air(const PhyParams& phy, int phy_payload_bytes);

struct Transmission {
  TimeInstant start{};
  Duration airtime{};
  std::int64_t channel_hz = 0;
  int sf = 7;
  double tx_power_dbm = 14.0;
  int source = -1;

  TimeInstant end() const { return start + airtime; }
};

/// True iff the time intervals intersect and both channel and SF match.
bool overlaps(const Transmission& a, const Transmission& b);

enum class TxOutcome { Ok, Lost };

/// Collision resolution at a single receiver. Without capture any overlap
/// on the same channel/SF kills both frames; with capture the strongest
/// survives iff it exceeds every overlapping frame by at least the
/// threshold.
std::vector<TxOutcome> resolve_collisions(std::span<const Transmission> concurrent,
                                          bool capture_enabled,
                                          double capture_threshold_db);

}  // namespace lpwan::phy

#endif
