#include "lpwan/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace lpwan::io {

using nlohmann::ordered_json;

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string records_csv(std::span<const PacketRecord> records) {
  std::ostringstream out;
  out << "flow,t_sched_us,t_deliv_us,loss_cause\n";
  for (const PacketRecord& r : records) {
    out << r.flow << ',' << as_us(r.scheduled) << ',';
    if (r.delivered) out << as_us(*r.delivered);
    out << ',';
    if (r.loss) out << to_string(*r.loss);
    out << '\n';
  }
  return out.str();
}

std::string cdf_csv(const EmpiricalCdf& cdf) {
  std::ostringstream out;
  out << "t_s,F\n";
  for (const auto& [t, f] : cdf.steps)
    out << format_double(t, 6) << ',' << format_double(f, 9) << '\n';
  return out.str();
}

std::string summary_json(const ScenarioConfig& scenario, const MetricsReport& report) {
  ordered_json j;
  j["scenario"] = scenario.name;
  j["stack"] = to_string(scenario.stack);
  j["seed"] = scenario.seed;
  j["duration_s"] = scenario.duration_s;
  j["scheduled"] = report.scheduled;
  j["delivered"] = report.delivered;
  j["in_flight"] = report.in_flight;
  j["prr"] = report.prr;
  j["data_extraction_ratio"] = report.data_extraction_ratio;
  j["delta"] = report.data_extraction_ratio - report.prr;
  j["completion_p50_s"] = report.p50_s;
  j["completion_p95_s"] = report.p95_s;
  j["completion_max_s"] = report.max_s;
  ordered_json losses = ordered_json::object();
  for (const auto& [cause, n] : report.losses) losses[to_string(cause)] = n;
  j["losses"] = losses;
  return j.dump(2) + "\n";
}

std::string energy_csv(std::span<const energy::EnergyRow> rows) {
  std::ostringstream out;
  out << "device,stack,txi,avg_mw\n";
  for (const auto& row : rows) {
    out << row.device_kind << ',' << to_string(row.stack) << ',';
    if (row.txi_s) out << *row.txi_s;
    out << ',' << format_double(row.avg_mw, 6) << '\n';
  }
  return out.str();
}

std::string sweep_csv(std::span<const analytics::SweepRow> rows) {
  std::ostringstream out;
  out << "utilization_pct,n_slots,n_msf,cdf\n";
  for (const auto& row : rows) {
    out << format_double(row.utilization_pct, 2) << ',' << row.slots << ',';
    if (row.stable)
      out << row.n_msf << ',' << format_double(row.cdf, 9) << '\n';
    else
      out << "unstable,\n";
  }
  return out.str();
}

std::string gts_schedule_csv(const dsme::GtsSchedule& schedule, const ScenarioConfig& scenario) {
  std::ostringstream out;
  out << "slot,channel,sender,receiver\n";
  for (const auto& cell : schedule.cells) {
    out << cell.msf_slot_index << ',' << cell.channel_index << ','
        << scenario.devices[cell.sender].id << ',' << scenario.devices[cell.receiver].id << '\n';
  }
  return out.str();
}

std::string lorawan_events_csv(std::span<const lorawan::EventLogRow> rows) {
  std::ostringstream out;
  out << "time_us,device,event,channel_hz,outcome\n";
  for (const auto& row : rows) {
    out << as_us(row.t) << ',' << row.device << ',' << row.event << ',' << row.channel_hz << ','
        << row.outcome << '\n';
  }
  return out.str();
}

std::string frame_report_json(const compression::CompareReport& report) {
  auto layout = [](const compression::FrameLayout& f) {
    return ordered_json{{"l2_header_bytes", f.l2_header_bytes},
                        {"adaptation_bytes", f.adaptation_bytes},
                        {"upper_header_bytes", f.upper_header_bytes},
                        {"payload_bytes", f.payload_bytes},
                        {"total_phy_payload", f.total_phy_payload()},
                        {"compression_ratio", f.compression_ratio},
                        {"fallback", f.fallback}};
  };
  ordered_json j;
  j["schc_lorawan"] = layout(report.schc);
  j["schc_lorawan"]["toa_ms"] = as_seconds(report.toa_schc) * 1e3;
  j["sixlowpan_dsme"] = layout(report.sixlowpan);
  j["sixlowpan_dsme"]["toa_ms"] = as_seconds(report.toa_sixlowpan) * 1e3;
  return j.dump(2) + "\n";
}

}  // namespace lpwan::io
