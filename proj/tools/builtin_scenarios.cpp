#include "builtin_scenarios.hpp"

#include <stdexcept>

namespace lpwan::cli {

ScenarioConfig paper_scenario(StackKind stack, int txi_s) {
  ScenarioConfig cfg;
  cfg.stack = stack;
  cfg.seed = 1;
  cfg.duration_s = 3600.0;
  switch (stack) {
    case StackKind::DsmeLora: cfg.name = "6lora_"; break;
    case StackKind::LorawanClassA: cfg.name = "schc_lorawan_a_"; break;
    case StackKind::LorawanClassC: cfg.name = "schc_lorawan_c_"; break;
  }
  cfg.name += std::to_string(txi_s) + "s";

  for (int a = 1; a <= 3; ++a)
    cfg.devices.push_back(DeviceSpec{"actuator" + std::to_string(a), DeviceRole::Actuator, 1});
  auto sensor = [](int s) { return (s < 10 ? "sensor0" : "sensor") + std::to_string(s); };
  for (int s = 1; s <= 12; ++s)
    cfg.devices.push_back(DeviceSpec{sensor(s), DeviceRole::Sensor, s <= 8 ? 2 : 3});
  for (int s = 1; s <= 6; ++s) cfg.flows.push_back(FlowSpec{sensor(s), "actuator1"});
  for (int s = 7; s <= 9; ++s) cfg.flows.push_back(FlowSpec{sensor(s), "actuator2"});
  for (int s = 10; s <= 12; ++s) cfg.flows.push_back(FlowSpec{sensor(s), "actuator3"});

  cfg.traffic.kind = TrafficLaw::Kind::Uniform;
  cfg.traffic.mean_s = txi_s;
  cfg.traffic.half_range_s = 2.0;
  return cfg;
}

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names{
      "6lora_10s",          "6lora_20s",          "schc_lorawan_a_10s",
      "schc_lorawan_a_20s", "schc_lorawan_c_10s", "schc_lorawan_c_20s"};
  return names;
}

bool is_builtin_scenario(const std::string& name) {
  for (const auto& n : builtin_scenario_names())
    if (n == name) return true;
  return false;
}

ScenarioConfig builtin_scenario(const std::string& name) {
  const int txi = name.ends_with("10s") ? 10 : name.ends_with("20s") ? 20 : 0;
  if (txi != 0) {
    if (name.starts_with("6lora_")) return paper_scenario(StackKind::DsmeLora, txi);
    if (name.starts_with("schc_lorawan_a_")) return paper_scenario(StackKind::LorawanClassA, txi);
    if (name.starts_with("schc_lorawan_c_")) return paper_scenario(StackKind::LorawanClassC, txi);
  }
  throw std::invalid_argument("unknown builtin scenario '" + name + "'");
}

}  // namespace lpwan::cli
