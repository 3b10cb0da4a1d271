#include "lpwan/energy.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace lpwan::energy {

void PowerProfile::validate() const {
  if (!(p_tx_mw >= p_rx_mw && p_rx_mw >= p_sleep_mw && p_sleep_mw >= 0))
    throw std::invalid_argument("power profile must satisfy p_tx >= p_rx >= p_sleep >= 0");
  if (mac_overhead_mw < 0) throw std::invalid_argument("mac overhead must be >= 0");
}

double average_power(std::span<const RadioStateInterval> device_intervals,
                     const PowerProfile& profile, Duration run_duration) {
  profile.validate();
  if (run_duration <= Duration{0}) throw std::invalid_argument("run duration must be > 0");
  if (device_intervals.empty()) throw std::invalid_argument("empty radio trace");

  std::vector<RadioStateInterval> sorted(device_intervals.begin(), device_intervals.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const RadioStateInterval& a, const RadioStateInterval& b) {
              return a.start < b.start;
            });
  double energy_mw_s = 0.0;
  TimeInstant cursor = sim_start;
  for (const RadioStateInterval& iv : sorted) {
    if (iv.start != cursor)
      throw std::invalid_argument("radio intervals must tile the run without gaps or overlaps");
    if (iv.end <= iv.start) throw std::invalid_argument("empty radio interval");
    const double dt = as_seconds(iv.end - iv.start);
    switch (iv.state) {
      case RadioState::Tx: energy_mw_s += profile.p_tx_mw * dt; break;
      case RadioState::Rx: energy_mw_s += profile.p_rx_mw * dt; break;
      case RadioState::Sleep: energy_mw_s += profile.p_sleep_mw * dt; break;
    }
    cursor = iv.end;
  }
  if (cursor != TimeInstant{run_duration})
    throw std::invalid_argument("radio intervals do not cover the full run");
  return energy_mw_s / as_seconds(run_duration) + profile.mac_overhead_mw;
}

namespace {

double mean_power_over(const RunTrace& trace, const PowerProfile& profile, DeviceRole role,
                       bool three_flow_actuators_only) {
  const ScenarioConfig& cfg = *trace.scenario;
  std::map<int, int> rx_flows;
  for (const auto& f : cfg.resolved_flows()) rx_flows[f.actuator]++;

  std::map<int, std::vector<RadioStateInterval>> per_device;
  for (const RadioStateInterval& iv : trace.radio) per_device[iv.device].push_back(iv);

  double total = 0.0;
  int count = 0;
  for (const auto& [device, intervals] : per_device) {
    if (cfg.devices[device].role != role) continue;
    if (three_flow_actuators_only && rx_flows[device] != 3) continue;
    total += average_power(intervals, profile, cfg.duration());
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no matching devices in trace");
  return total / count;
}

}  // namespace

std::vector<EnergyRow> energy_report(std::span<const RunTrace> traces,
                                     const PowerProfile& lorawan_profile,
                                     const PowerProfile& dsme_profile) {
  const StackKind stacks[] = {StackKind::LorawanClassA, StackKind::LorawanClassC,
                              StackKind::DsmeLora};
  auto find_trace = [&](StackKind stack, int txi) -> const RunTrace& {
    for (const RunTrace& t : traces)
      if (t.stack == stack && t.txi_s == txi) return t;
    throw std::invalid_argument("missing configuration: " + to_string(stack) + " at " +
                                std::to_string(txi) + " s");
  };

  std::vector<EnergyRow> rows;
  for (const int txi : {20, 10}) {
    for (const StackKind stack : stacks) {
      const PowerProfile& prof = stack == StackKind::DsmeLora ? dsme_profile : lorawan_profile;
      const RunTrace& trace = find_trace(stack, txi);
      rows.push_back(EnergyRow{"sensor", txi, stack,
                               mean_power_over(trace, prof, DeviceRole::Sensor, false)});
    }
  }
  for (const StackKind stack : stacks) {
    const PowerProfile& prof = stack == StackKind::DsmeLora ? dsme_profile : lorawan_profile;
    // Relaxed-scenario trace; the actuator load does not depend on TXi.
    const RunTrace& trace = find_trace(stack, 20);
    rows.push_back(EnergyRow{"actuator", std::nullopt, stack,
                             mean_power_over(trace, prof, DeviceRole::Actuator, true)});
  }
  return rows;
}

std::vector<ProfilePair> admissible_profile_grid() {
  std::vector<ProfilePair> grid;
  for (const double p_rx : {30.0, 40.0, 55.0}) {
    for (const double tx_factor : {1.5, 2.25}) {
      for (const double dsme_overhead : {0.5, 1.5}) {
        PowerProfile lorawan{p_rx * tx_factor, p_rx, 0.01, 0.0};
        PowerProfile dsme{p_rx * tx_factor, p_rx, 0.01, dsme_overhead};
        grid.push_back(ProfilePair{lorawan, dsme});
      }
    }
  }
  return grid;  // 12 admissible pairs
}

}  // namespace lpwan::energy
