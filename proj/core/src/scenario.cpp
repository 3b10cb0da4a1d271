#include "lpwan/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lpwan {

using nlohmann::ordered_json;

std::string to_string(StackKind stack) {
  switch (stack) {
    case StackKind::DsmeLora: return "dsme-lora";
    case StackKind::LorawanClassA: return "lorawan-class-a";
    case StackKind::LorawanClassC: return "lorawan-class-c";
  }
  return "?";
}

namespace {

StackKind stack_from_string(const std::string& s) {
  if (s == "dsme-lora") return StackKind::DsmeLora;
  if (s == "lorawan-class-a") return StackKind::LorawanClassA;
  if (s == "lorawan-class-c") return StackKind::LorawanClassC;
  throw ScenarioError("unknown stack '" + s + "' (expected dsme-lora, lorawan-class-a or lorawan-class-c)");
}

DeviceRole role_from_string(const std::string& s) {
  if (s == "sensor") return DeviceRole::Sensor;
  if (s == "actuator") return DeviceRole::Actuator;
  throw ScenarioError("unknown device role '" + s + "'");
}

template <typename T>
T get_or(const ordered_json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

void ScenarioConfig::validate() const {
  if (duration_s <= 0) throw ScenarioError("duration must be > 0 seconds");
  if (devices.empty()) throw ScenarioError("scenario has no devices");
  std::set<std::string> ids;
  for (const DeviceSpec& d : devices) {
    if (d.id.empty()) throw ScenarioError("device with empty id");
    if (!ids.insert(d.id).second) throw ScenarioError("duplicate device id '" + d.id + "'");
  }
  for (const FlowSpec& f : flows) {
    const int s = device_index(f.sensor);
    const int a = device_index(f.actuator);
    if (s < 0) throw ScenarioError("flow references unknown sensor '" + f.sensor + "'");
    if (a < 0) throw ScenarioError("flow references unknown actuator '" + f.actuator + "'");
    if (devices[s].role != DeviceRole::Sensor)
      throw ScenarioError("flow source '" + f.sensor + "' is not a sensor");
    if (devices[a].role != DeviceRole::Actuator)
      throw ScenarioError("flow target '" + f.actuator + "' is not an actuator");
  }
  switch (traffic.kind) {
    case TrafficLaw::Kind::Uniform:
      if (traffic.mean_s <= 0) throw ScenarioError("uniform traffic mean must be > 0");
      if (traffic.half_range_s < 0 || traffic.half_range_s >= traffic.mean_s)
        throw ScenarioError("uniform traffic half-range must be in [0, mean)");
      break;
    case TrafficLaw::Kind::Exponential:
      if (traffic.rate_hz <= 0) throw ScenarioError("exponential traffic rate must be > 0");
      break;
    case TrafficLaw::Kind::Periodic:
      if (traffic.mean_s <= 0) throw ScenarioError("periodic traffic period must be > 0");
      if (traffic.phase_s < 0) throw ScenarioError("periodic traffic phase must be >= 0");
      break;
  }
  if (stack == StackKind::DsmeLora) {
    if (1 + dsme.cap_slots + dsme.cfp_slots != 16)
      throw ScenarioError("superframe must have 1 beacon + cap + cfp = 16 slots");
    if (dsme.superframes_per_msf < 1) throw ScenarioError("superframes per msf must be >= 1");
    if (dsme.channels < 1) throw ScenarioError("dsme channel count must be >= 1");
    if (dsme.superframe_duration_s <= 0) throw ScenarioError("superframe duration must be > 0");
    if (dsme.mac_queue_capacity < 1) throw ScenarioError("mac queue capacity must be >= 1");
    if (dsme.slots_per_flow < 1) throw ScenarioError("slots per flow must be >= 1");
  } else {
    if (lorawan.uplink_channels < 1) throw ScenarioError("need at least one uplink channel");
    if (lorawan.polling_interval_s <= 0) throw ScenarioError("polling interval must be > 0");
    if (lorawan.class_c_throttle_s < 0) throw ScenarioError("class C throttle must be >= 0");
  }
}

int ScenarioConfig::device_index(std::string_view id) const {
  for (std::size_t i = 0; i < devices.size(); ++i)
    if (devices[i].id == id) return static_cast<int>(i);
  return -1;
}

std::vector<ScenarioConfig::ResolvedFlow> ScenarioConfig::resolved_flows() const {
  std::vector<ResolvedFlow> out;
  out.reserve(flows.size());
  for (const FlowSpec& f : flows)
    out.push_back(ResolvedFlow{device_index(f.sensor), device_index(f.actuator)});
  return out;
}

ScenarioConfig ScenarioConfig::from_json_text(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("scenario JSON does not parse: ") + e.what());
  }
  ScenarioConfig cfg;
  try {
    cfg.name = get_or<std::string>(j, "name", "scenario");
    cfg.stack = stack_from_string(j.at("stack").get<std::string>());
    cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
    cfg.duration_s = get_or<double>(j, "duration_s", 3600.0);

    for (const auto& dj : j.at("devices")) {
      DeviceSpec d;
      d.id = dj.at("id").get<std::string>();
      d.role = role_from_string(dj.at("role").get<std::string>());
      d.cluster = get_or<int>(dj, "cluster", 0);
      cfg.devices.push_back(d);
    }
    for (const auto& fj : j.at("flows"))
      cfg.flows.push_back(FlowSpec{fj.at("sensor").get<std::string>(),
                                   fj.at("actuator").get<std::string>()});

    if (j.contains("traffic")) {
      const auto& tj = j.at("traffic");
      const std::string law = tj.at("law").get<std::string>();
      if (law == "uniform") {
        cfg.traffic.kind = TrafficLaw::Kind::Uniform;
        cfg.traffic.mean_s = tj.at("mean_s").get<double>();
        cfg.traffic.half_range_s = tj.at("half_range_s").get<double>();
      } else if (law == "exponential") {
        cfg.traffic.kind = TrafficLaw::Kind::Exponential;
        cfg.traffic.rate_hz = tj.at("rate_hz").get<double>();
      } else if (law == "periodic") {
        cfg.traffic.kind = TrafficLaw::Kind::Periodic;
        cfg.traffic.mean_s = tj.at("period_s").get<double>();
        cfg.traffic.phase_s = get_or<double>(tj, "phase_s", 0.0);
      } else {
        throw ScenarioError("unknown traffic law '" + law + "'");
      }
    }

    if (j.contains("phy")) {
      const auto& pj = j.at("phy");
      cfg.phy.spreading_factor = get_or<int>(pj, "spreading_factor", 7);
      cfg.phy.bandwidth_hz = get_or<int>(pj, "bandwidth_hz", 125000);
      cfg.phy.coding_rate = get_or<int>(pj, "coding_rate", 1);
      cfg.phy.preamble_symbols = get_or<int>(pj, "preamble_symbols", 8);
      cfg.phy.explicit_header = get_or<bool>(pj, "explicit_header", true);
      cfg.phy.crc_on = get_or<bool>(pj, "crc_on", true);
      cfg.phy.low_datarate_optimize = get_or<bool>(pj, "low_datarate_optimize", false);
    }

    if (j.contains("dsme")) {
      const auto& dj = j.at("dsme");
      cfg.dsme.superframe_duration_s = get_or<double>(dj, "superframe_duration_s", 3.84);
      cfg.dsme.superframes_per_msf = get_or<int>(dj, "superframes_per_msf", 1);
      cfg.dsme.cap_slots = get_or<int>(dj, "cap_slots", 8);
      cfg.dsme.cfp_slots = get_or<int>(dj, "cfp_slots", 7);
      cfg.dsme.channels = get_or<int>(dj, "channels", 4);
      cfg.dsme.sleep_during_cap = get_or<bool>(dj, "sleep_during_cap", true);
      cfg.dsme.guard_s = get_or<double>(dj, "guard_s", 0.010);
      cfg.dsme.rx_early_s = get_or<double>(dj, "rx_early_s", 0.020);
      cfg.dsme.mac_queue_capacity = get_or<int>(dj, "mac_queue_capacity", 16);
      cfg.dsme.slots_per_flow = get_or<int>(dj, "slots_per_flow", 1);
      cfg.dsme.colocate_gts = get_or<bool>(dj, "colocate_gts", false);
    }

    if (j.contains("lorawan")) {
      const auto& lj = j.at("lorawan");
      cfg.lorawan.uplink_channels = get_or<int>(lj, "uplink_channels", 8);
      cfg.lorawan.rx1_delay_s = get_or<double>(lj, "rx1_delay_s", 1.0);
      cfg.lorawan.rx2_delay_s = get_or<double>(lj, "rx2_delay_s", 2.0);
      cfg.lorawan.polling_interval_s = get_or<double>(lj, "polling_interval_s", 10.0);
      cfg.lorawan.poll_jitter_s = get_or<double>(lj, "poll_jitter_s", 0.5);
      cfg.lorawan.frame_pending_poll_jitter_s =
          get_or<double>(lj, "frame_pending_poll_jitter_s", 0.5);
      cfg.lorawan.class_c_throttle_s = get_or<double>(lj, "class_c_throttle_s", 2.0);
      cfg.lorawan.uplink_path_s = get_or<double>(lj, "uplink_path_s", 0.150);
      cfg.lorawan.endpoint_processing_s = get_or<double>(lj, "endpoint_processing_s", 0.005);
      cfg.lorawan.downlink_path_s = get_or<double>(lj, "downlink_path_s", 1.2);
      cfg.lorawan.empty_rx_window_s = get_or<double>(lj, "empty_rx_window_s", 0.030);
      cfg.lorawan.downlink_queue_capacity = get_or<int>(lj, "downlink_queue_capacity", 0);
      cfg.lorawan.capture_enabled = get_or<bool>(lj, "capture_enabled", false);
      cfg.lorawan.capture_threshold_db = get_or<double>(lj, "capture_threshold_db", 6.0);
      cfg.lorawan.tx_power_dbm = get_or<double>(lj, "tx_power_dbm", 14.0);
      if (lj.contains("duty")) {
        const auto& uj = lj.at("duty");
        cfg.lorawan.duty.gateway_enabled = get_or<bool>(uj, "gateway_enabled", true);
        cfg.lorawan.duty.device_enabled = get_or<bool>(uj, "device_enabled", true);
        cfg.lorawan.duty.uplink_band_fraction = get_or<double>(uj, "uplink_band_fraction", 0.01);
        cfg.lorawan.duty.rx2_band_fraction = get_or<double>(uj, "rx2_band_fraction", 0.10);
        cfg.lorawan.duty.device_fraction = get_or<double>(uj, "device_fraction", 0.01);
        cfg.lorawan.duty.bucket_window_s = get_or<double>(uj, "bucket_window_s", 60.0);
      }
    }

    if (j.contains("template")) {
      const auto& tj = j.at("template");
      const std::string which = tj.is_string() ? tj.get<std::string>() : "";
      if (which == "paper-default") {
        cfg.data_template = compression::PacketTemplate::paper_default();
      } else if (which == "minimal") {
        cfg.data_template = compression::PacketTemplate::minimal();
      } else if (!which.empty()) {
        throw ScenarioError("unknown template '" + which + "'");
      } else {
        compression::PacketTemplate t = compression::PacketTemplate::paper_default();
        t.payload_bytes = get_or<int>(tj, "payload_bytes", t.payload_bytes);
        if (tj.contains("coap")) {
          compression::CoapSpec coap;
          coap.token_length = get_or<int>(tj.at("coap"), "token_length", 2);
          coap.options.clear();
          if (tj.at("coap").contains("options"))
            for (const auto& oj : tj.at("coap").at("options"))
              coap.options.push_back(compression::CoapOption{oj.at("number").get<int>(),
                                                             oj.at("length").get<int>()});
          t.coap = coap;
        }
        cfg.data_template = t;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("scenario JSON is malformed: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError("cannot open scenario file '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ScenarioConfig::to_json_text() const {
  ordered_json j;
  j["name"] = name;
  j["stack"] = to_string(stack);
  j["seed"] = seed;
  j["duration_s"] = duration_s;
  j["devices"] = ordered_json::array();
  for (const DeviceSpec& d : devices) {
    j["devices"].push_back({{"id", d.id},
                            {"role", d.role == DeviceRole::Sensor ? "sensor" : "actuator"},
                            {"cluster", d.cluster}});
  }
  j["flows"] = ordered_json::array();
  for (const FlowSpec& f : flows)
    j["flows"].push_back({{"sensor", f.sensor}, {"actuator", f.actuator}});
  switch (traffic.kind) {
    case TrafficLaw::Kind::Uniform:
      j["traffic"] = {{"law", "uniform"}, {"mean_s", traffic.mean_s},
                      {"half_range_s", traffic.half_range_s}};
      break;
    case TrafficLaw::Kind::Exponential:
      j["traffic"] = {{"law", "exponential"}, {"rate_hz", traffic.rate_hz}};
      break;
    case TrafficLaw::Kind::Periodic:
      j["traffic"] = {{"law", "periodic"}, {"period_s", traffic.mean_s},
                      {"phase_s", traffic.phase_s}};
      break;
  }
  j["phy"] = {{"spreading_factor", phy.spreading_factor},
              {"bandwidth_hz", phy.bandwidth_hz},
              {"coding_rate", phy.coding_rate},
              {"preamble_symbols", phy.preamble_symbols},
              {"explicit_header", phy.explicit_header},
              {"crc_on", phy.crc_on},
              {"low_datarate_optimize", phy.low_datarate_optimize}};
  if (stack == StackKind::DsmeLora) {
    j["dsme"] = {{"superframe_duration_s", dsme.superframe_duration_s},
                 {"superframes_per_msf", dsme.superframes_per_msf},
                 {"cap_slots", dsme.cap_slots},
                 {"cfp_slots", dsme.cfp_slots},
                 {"channels", dsme.channels},
                 {"sleep_during_cap", dsme.sleep_during_cap},
                 {"guard_s", dsme.guard_s},
                 {"rx_early_s", dsme.rx_early_s},
                 {"mac_queue_capacity", dsme.mac_queue_capacity},
                 {"slots_per_flow", dsme.slots_per_flow},
                 {"colocate_gts", dsme.colocate_gts}};
  } else {
    j["lorawan"] = {{"uplink_channels", lorawan.uplink_channels},
                    {"rx1_delay_s", lorawan.rx1_delay_s},
                    {"rx2_delay_s", lorawan.rx2_delay_s},
                    {"polling_interval_s", lorawan.polling_interval_s},
                    {"poll_jitter_s", lorawan.poll_jitter_s},
                    {"frame_pending_poll_jitter_s", lorawan.frame_pending_poll_jitter_s},
                    {"class_c_throttle_s", lorawan.class_c_throttle_s},
                    {"uplink_path_s", lorawan.uplink_path_s},
                    {"endpoint_processing_s", lorawan.endpoint_processing_s},
                    {"downlink_path_s", lorawan.downlink_path_s},
                    {"empty_rx_window_s", lorawan.empty_rx_window_s},
                    {"downlink_queue_capacity", lorawan.downlink_queue_capacity},
                    {"capture_enabled", lorawan.capture_enabled},
                    {"capture_threshold_db", lorawan.capture_threshold_db},
                    {"tx_power_dbm", lorawan.tx_power_dbm},
                    {"duty",
                     {{"gateway_enabled", lorawan.duty.gateway_enabled},
                      {"device_enabled", lorawan.duty.device_enabled},
                      {"uplink_band_fraction", lorawan.duty.uplink_band_fraction},
                      {"rx2_band_fraction", lorawan.duty.rx2_band_fraction},
                      {"device_fraction", lorawan.duty.device_fraction},
                      {"bucket_window_s", lorawan.duty.bucket_window_s}}}};
  }
  j["template"] = "paper-default";
  return j.dump(2) + "\n";
}

}  // namespace lpwan
