#ifndef LPWAN_TOOLS_BUILTIN_SCENARIOS_HPP
#define LPWAN_TOOLS_BUILTIN_SCENARIOS_HPP

#include <string>
#include <vector>

#include "lpwan/scenario.hpp"

namespace lpwan::cli {

/// The evaluation topology: three actuators (cluster 1), eight sensors in
/// cluster 2 and four in cluster 3. Six flows feed the first actuator and
/// three each the other two; sensors post 12-byte CoAP messages at uniform
/// intervals of txi +- 2 s.
ScenarioConfig paper_scenario(StackKind stack, int txi_s);

/// Names of the six shipped scenarios (6lora_10s, ..., schc_lorawan_c_20s).
const std::vector<std::string>& builtin_scenario_names();

bool is_builtin_scenario(const std::string& name);
ScenarioConfig builtin_scenario(const std::string& name);

}  // namespace lpwan::cli

#endif
