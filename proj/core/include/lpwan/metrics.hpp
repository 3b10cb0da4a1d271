#ifndef LPWAN_METRICS_HPP
#define LPWAN_METRICS_HPP

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lpwan/records.hpp"

namespace lpwan {

struct EmptyMetricError : std::runtime_error {
  explicit EmptyMetricError(const std::string& what) : std::runtime_error(what) {}
};

/// Right-continuous empirical step function; the final value equals the
/// packet reception ratio, matching the figure convention where the curve
/// meets the right axis at the PRR.
struct EmpiricalCdf {
  std::vector<std::pair<double, double>> steps;  // (completion seconds, F)

  double final_value() const { return steps.empty() ? 0.0 : steps.back().second; }
  double value_at(double t_s) const;
};

/// Completion-time CDF over delivered packets, normalized by completed
/// (delivered + lost) packets. Throws EmptyMetricError when no packet
/// completed or none was delivered.
EmpiricalCdf completion_cdf(std::span<const PacketRecord> records);

struct MetricsReport {
  double prr = 0.0;                  // delivered / completed
  double data_extraction_ratio = 0.0;  // uplink decoded / completed
  double p50_s = 0.0;
  double p95_s = 0.0;
  double max_s = 0.0;
  std::int64_t scheduled = 0;
  std::int64_t delivered = 0;
  std::int64_t in_flight = 0;
  std::map<LossCause, std::int64_t> losses;
};

MetricsReport summarize(std::span<const PacketRecord> records);

/// Kolmogorov-Smirnov distance between sample values and the uniform
/// distribution on [lo, hi].
double ks_distance_to_uniform(std::vector<double> samples, double lo, double hi);

}  // namespace lpwan

#endif
