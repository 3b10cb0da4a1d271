#include "lpwan/phy.hpp"

#include <algorithm>
#include <stdexcept>

namespace lpwan::phy {

namespace {

void validate(const PhyParams& phy) {
  if (phy.spreading_factor < 7 || phy.spreading_factor > 12)
    throw std::invalid_argument("spreading factor must be in 7..12");
  if (phy.bandwidth_hz != 125000 && phy.bandwidth_hz != 250000 && phy.bandwidth_hz != 500000)
    throw std::invalid_argument("bandwidth must be 125/250/500 kHz");
  if (phy.coding_rate < 1 || phy.coding_rate > 4)
    throw std::invalid_argument("coding rate must be in 1..4");
  if (phy.preamble_symbols < 1)
    throw std::invalid_argument("preamble length must be positive");
}

}  // namespace

Duration symbol_time(const PhyParams& phy) {
  validate(phy);
  // 2^SF * 1e6 / BW is an exact integer for all supported combinations
  // (smallest case SF7BW500 = 256 us).
  const std::int64_t us = (std::int64_t{1} << phy.spreading_factor) * 1000000 / phy.bandwidth_hz;
  return Duration{us};
}

Duration time_on_air(const PhyParams& phy, int phy_payload_bytes) {
  validate(phy);
  if (phy_payload_bytes < 0 || phy_payload_bytes > 255)
    throw std::invalid_argument("PHY payload must be 0..255 bytes");

  const int sf = phy.spreading_factor;
  const int de = phy.low_datarate_optimize ? 1 : 0;
  const int ih = phy.explicit_header ? 0 : 1;
  const int crc = phy.crc_on ? 1 : 0;

  const int numerator =
      8 * phy_payload_bytes - 4 * sf + 28 + 16 * crc - 20 * ih;
  const int denominator = 4 * (sf - 2 * de);
  const int blocks = numerator <= 0 ? 0 : (numerator + denominator - 1) / denominator;
  const int payload_symbols = 8 + blocks * (phy.coding_rate + 4);

  // Total symbols = preamble + 4.25 sync + payload; computed in quarter
  // symbols to stay on the exact integer microsecond grid.
  const std::int64_t quarter_symbols =
      4 * static_cast<std::int64_t>(phy.preamble_symbols) + 17 + 4 * payload_symbols;
  const std::int64_t sym_us = symbol_time(phy).count();
  return Duration{quarter_symbols * sym_us / 4};
}

bool overlaps(const Transmission& a, const Transmission& b) {
  if (a.channel_hz != b.channel_hz || a.sf != b.sf) return false;
  return a.start < b.end() && b.start < a.end();
}

std::vector<TxOutcome> resolve_collisions(std::span<const Transmission> concurrent,
                                          bool capture_enabled,
                                          double capture_threshold_db) {
  std::vector<TxOutcome> out(concurrent.size(), TxOutcome::Ok);
  for (std::size_t i = 0; i < concurrent.size(); ++i) {
    bool survives = true;
    for (std::size_t j = 0; j < concurrent.size(); ++j) {
      if (i == j || !overlaps(concurrent[i], concurrent[j])) continue;
      if (!capture_enabled ||
          concurrent[i].tx_power_dbm - concurrent[j].tx_power_dbm < capture_threshold_db) {
        survives = false;
        break;
      }
    }
    out[i] = survives ? TxOutcome::Ok : TxOutcome::Lost;
  }
  return out;
}

}  // namespace lpwan::phy
