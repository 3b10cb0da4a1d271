#ifndef LPWAN_IO_HPP
#define LPWAN_IO_HPP

#include <filesystem>
#include <span>
#include <string>

#include "lpwan/analytics.hpp"
#include "lpwan/compression.hpp"
#include "lpwan/energy.hpp"
#include "lpwan/engine.hpp"
#include "lpwan/metrics.hpp"

namespace lpwan::io {

/// Writes content to `path` via a temp file in the same directory plus
/// rename, so readers never observe partial files.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string records_csv(std::span<const PacketRecord> records);
std::string cdf_csv(const EmpiricalCdf& cdf);
std::string summary_json(const ScenarioConfig& scenario, const MetricsReport& report);
std::string energy_csv(std::span<const energy::EnergyRow> rows);
std::string sweep_csv(std::span<const analytics::SweepRow> rows);
std::string gts_schedule_csv(const dsme::GtsSchedule& schedule, const ScenarioConfig& scenario);
std::string lorawan_events_csv(std::span<const lorawan::EventLogRow> rows);
std::string frame_report_json(const compression::CompareReport& report);

std::string format_double(double v, int precision = 9);

}  // namespace lpwan::io

#endif
