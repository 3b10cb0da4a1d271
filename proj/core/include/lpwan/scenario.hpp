#ifndef LPWAN_SCENARIO_HPP
#define LPWAN_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lpwan/compression.hpp"
#include "lpwan/phy.hpp"
#include "lpwan/time.hpp"

namespace lpwan {

enum class StackKind { DsmeLora, LorawanClassA, LorawanClassC };

std::string to_string(StackKind stack);

enum class DeviceRole { Sensor, Actuator };

struct DeviceSpec {
  std::string id;
  DeviceRole role = DeviceRole::Sensor;
  int cluster = 0;
};

struct FlowSpec {
  std::string sensor;
  std::string actuator;
};

struct TrafficLaw {
  enum class Kind { Uniform, Exponential, Periodic };
  Kind kind = Kind::Uniform;
  double mean_s = 10.0;        // uniform / periodic
  double half_range_s = 2.0;   // uniform
  double rate_hz = 0.1;        // exponential
  double phase_s = 0.0;        // periodic (test-oriented, deterministic)
};

struct DutyCycleConfig {
  bool gateway_enabled = true;
  bool device_enabled = true;
  double uplink_band_fraction = 0.01;
  double rx2_band_fraction = 0.10;
  double device_fraction = 0.01;
  double bucket_window_s = 60.0;  // bucket capacity = fraction * window
};

struct LorawanConfig {
  int uplink_channels = 8;
  double rx1_delay_s = 1.0;
  double rx2_delay_s = 2.0;
  double polling_interval_s = 10.0;
  double poll_jitter_s = 0.5;
  double frame_pending_poll_jitter_s = 0.5;
  double class_c_throttle_s = 2.0;
  double uplink_path_s = 0.150;
  double endpoint_processing_s = 0.005;
  double downlink_path_s = 1.2;
  double empty_rx_window_s = 0.030;
  int downlink_queue_capacity = 0;  // 0 = unbounded
  bool capture_enabled = false;
  double capture_threshold_db = 6.0;
  double tx_power_dbm = 14.0;
  DutyCycleConfig duty;
};

struct DsmeScenarioConfig {
  double superframe_duration_s = 3.84;
  int superframes_per_msf = 1;
  int cap_slots = 8;
  int cfp_slots = 7;
  int channels = 4;
  bool sleep_during_cap = true;
  double guard_s = 0.010;
  double rx_early_s = 0.020;
  int mac_queue_capacity = 16;
  int slots_per_flow = 1;
  bool colocate_gts = false;  // place repeated cells back-to-back instead of spread
};

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// Full description of one experiment. Loaded from JSON (schema in the
/// repository README) or constructed directly.
struct ScenarioConfig {
  std::string name = "scenario";
  StackKind stack = StackKind::DsmeLora;
  std::uint64_t seed = 1;
  double duration_s = 3600.0;
  std::vector<DeviceSpec> devices;
  std::vector<FlowSpec> flows;
  TrafficLaw traffic;
  phy::PhyParams phy;
  DsmeScenarioConfig dsme;
  LorawanConfig lorawan;
  compression::PacketTemplate data_template = compression::PacketTemplate::paper_default();

  Duration duration() const { return duration_from_seconds(duration_s); }

  /// Throws ScenarioError with a detailed diagnostic on the first problem.
  void validate() const;

  int device_index(std::string_view id) const;  // -1 when unknown

  /// Flows with device ids resolved to indices (validate() must pass).
  struct ResolvedFlow {
    int sensor;
    int actuator;
  };
  std::vector<ResolvedFlow> resolved_flows() const;

  static ScenarioConfig from_json_text(std::string_view text);
  static ScenarioConfig load(const std::filesystem::path& file);
  std::string to_json_text() const;
};

}  // namespace lpwan

#endif
