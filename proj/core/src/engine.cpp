#include "lpwan/engine.hpp"

namespace lpwan {

RunResult run(const ScenarioConfig& scenario) {
  scenario.validate();
  switch (scenario.stack) {
    case StackKind::DsmeLora:
      return dsme_sim::simulate(scenario);
    case StackKind::LorawanClassA:
    case StackKind::LorawanClassC:
      return lorawan_sim::simulate(scenario);
  }
  throw ScenarioError("unknown stack");
}

}  // namespace lpwan
