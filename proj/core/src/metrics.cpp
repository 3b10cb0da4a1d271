#include "lpwan/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lpwan {

std::string to_string(LossCause cause) {
  switch (cause) {
    case LossCause::QueueDrop: return "queue-drop";
    case LossCause::UplinkCollision: return "uplink-collision";
    case LossCause::GatewayBusy: return "gateway-busy";
    case LossCause::DownlinkLoss: return "downlink-loss";
    case LossCause::Deadline: return "deadline";
  }
  return "?";
}

std::string to_string(RadioState state) {
  switch (state) {
    case RadioState::Tx: return "tx";
    case RadioState::Rx: return "rx";
    case RadioState::Sleep: return "sleep";
  }
  return "?";
}

double EmpiricalCdf::value_at(double t_s) const {
  double v = 0.0;
  for (const auto& [t, f] : steps) {
    if (t > t_s) break;
    v = f;
  }
  return v;
}

EmpiricalCdf completion_cdf(std::span<const PacketRecord> records) {
  std::int64_t completed = 0;
  std::vector<double> times;
  for (const PacketRecord& r : records) {
    if (r.in_flight()) continue;
    ++completed;
    if (r.delivered) times.push_back(as_seconds(*r.delivered - r.scheduled));
  }
  if (completed == 0) throw EmptyMetricError("no completed packet records");
  if (times.empty()) throw EmptyMetricError("no delivered packet records");
  std::sort(times.begin(), times.end());

  EmpiricalCdf cdf;
  const double denom = static_cast<double>(completed);
  std::size_t i = 0;
  while (i < times.size()) {
    std::size_t j = i;
    while (j < times.size() && times[j] == times[i]) ++j;
    cdf.steps.emplace_back(times[i], static_cast<double>(j) / denom);
    i = j;
  }
  return cdf;
}

MetricsReport summarize(std::span<const PacketRecord> records) {
  MetricsReport rep;
  std::vector<double> completions;
  std::int64_t completed = 0;
  std::int64_t extracted = 0;
  for (const PacketRecord& r : records) {
    ++rep.scheduled;
    if (r.in_flight()) {
      ++rep.in_flight;
      continue;
    }
    ++completed;
    if (r.extracted) ++extracted;
    if (r.delivered) {
      ++rep.delivered;
      completions.push_back(as_seconds(*r.delivered - r.scheduled));
    } else {
      ++rep.losses[*r.loss];
    }
  }
  if (completed > 0) {
    rep.prr = static_cast<double>(rep.delivered) / static_cast<double>(completed);
    rep.data_extraction_ratio = static_cast<double>(extracted) / static_cast<double>(completed);
  }
  if (!completions.empty()) {
    std::sort(completions.begin(), completions.end());
    auto quantile = [&](double q) {
      const auto idx = static_cast<std::size_t>(
          std::min<double>(std::ceil(q * static_cast<double>(completions.size())) - 1,
                           static_cast<double>(completions.size() - 1)));
      return completions[std::max<std::size_t>(idx, 0)];
    };
    rep.p50_s = quantile(0.50);
    rep.p95_s = quantile(0.95);
    rep.max_s = completions.back();
  }
  return rep;
}

std::vector<RadioStateInterval> tile_radio_intervals(int device,
                                                     std::vector<RadioStateInterval> primitives,
                                                     Duration run_duration,
                                                     RadioState gap_state) {
  // Sweep over boundary points; at each elementary segment the winning
  // state is tx > rx > gap.
  std::vector<std::int64_t> cuts{0, run_duration.count()};
  for (auto& p : primitives) {
    p.start = std::max(p.start, sim_start);
    p.end = std::min(p.end, TimeInstant{run_duration});
    if (p.end <= p.start) continue;
    cuts.push_back(as_us(p.start));
    cuts.push_back(as_us(p.end));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::sort(primitives.begin(), primitives.end(),
            [](const RadioStateInterval& a, const RadioStateInterval& b) {
              return a.start < b.start;
            });

  std::vector<RadioStateInterval> out;
  std::size_t active_from = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const TimeInstant lo{Duration{cuts[c]}};
    const TimeInstant hi{Duration{cuts[c + 1]}};
    while (active_from < primitives.size() && primitives[active_from].end <= lo) ++active_from;
    RadioState state = gap_state;
    bool have_rx = false;
    for (std::size_t i = active_from; i < primitives.size() && primitives[i].start < hi; ++i) {
      if (primitives[i].end <= lo) continue;
      if (primitives[i].state == RadioState::Tx) {
        state = RadioState::Tx;
        break;
      }
      if (primitives[i].state == RadioState::Rx) have_rx = true;
    }
    if (state != RadioState::Tx && have_rx) state = RadioState::Rx;
    if (!out.empty() && out.back().state == state && out.back().end == lo) {
      out.back().end = hi;
    } else {
      out.push_back(RadioStateInterval{device, state, lo, hi});
    }
  }
  return out;
}

double ks_distance_to_uniform(std::vector<double> samples, double lo, double hi) {
  if (samples.empty() || hi <= lo) throw std::invalid_argument("ks_distance_to_uniform");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace lpwan
