#ifndef LPWAN_ENGINE_HPP
#define LPWAN_ENGINE_HPP

#include <vector>

#include "lpwan/dsme.hpp"
#include "lpwan/lorawan.hpp"
#include "lpwan/records.hpp"
#include "lpwan/scenario.hpp"

namespace lpwan {

struct RunResult {
  std::vector<PacketRecord> records;
  std::vector<RadioStateInterval> radio;  // tiled per device, in device order
  dsme::GtsSchedule schedule;             // DSME runs only
  std::vector<lorawan::EventLogRow> events;  // LoRaWAN runs only
  std::vector<lorawan::QueueDepthSample> downlink_queue_depth;  // LoRaWAN runs only
};

/// Runs one scenario to completion. Deterministic: identical scenarios
/// (including seed) produce identical results.
RunResult run(const ScenarioConfig& scenario);

namespace dsme_sim {
RunResult simulate(const ScenarioConfig& scenario);
}
namespace lorawan_sim {
RunResult simulate(const ScenarioConfig& scenario);
}

}  // namespace lpwan

#endif
