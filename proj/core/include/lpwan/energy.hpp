#ifndef LPWAN_ENERGY_HPP
#define LPWAN_ENERGY_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpwan/records.hpp"
#include "lpwan/scenario.hpp"

namespace lpwan::energy {

struct PowerProfile {
  double p_tx_mw = 90.0;
  double p_rx_mw = 40.0;
  double p_sleep_mw = 0.01;
  double mac_overhead_mw = 0.0;

  void validate() const;
};

/// Mean radio power over one device's tiled interval timeline, plus the
/// per-stack MAC overhead. The intervals must tile the run exactly.
double average_power(std::span<const RadioStateInterval> device_intervals,
                     const PowerProfile& profile, Duration run_duration);

struct EnergyRow {
  std::string device_kind;  // "sensor" / "actuator"
  std::optional<int> txi_s;
  StackKind stack;
  double avg_mw = 0.0;
};

struct RunTrace {
  StackKind stack;
  int txi_s = 0;
  const ScenarioConfig* scenario = nullptr;
  std::span<const RadioStateInterval> radio;
};

/// Mirrors the power table rows (sensor at 20 s / 10 s, actuator; per
/// stack). Sensor rows average over all sensors; the actuator row averages
/// over actuators receiving exactly three flows, as in the measurements.
/// Requires all six (stack, txi) combinations.
std::vector<EnergyRow> energy_report(std::span<const RunTrace> traces,
                                     const PowerProfile& lorawan_profile,
                                     const PowerProfile& dsme_profile);

/// The admissible-profile grid used by the ordering checks: p_tx >= p_rx,
/// p_rx much larger than p_sleep, DSME overhead above the LoRaWAN one.
struct ProfilePair {
  PowerProfile lorawan;
  PowerProfile dsme;
};
std::vector<ProfilePair> admissible_profile_grid();

}  // namespace lpwan::energy

#endif
