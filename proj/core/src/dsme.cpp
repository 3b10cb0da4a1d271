#include "lpwan/dsme.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "lpwan/compression.hpp"
#include "lpwan/engine.hpp"
#include "lpwan/event_queue.hpp"
#include "lpwan/rng.hpp"

namespace lpwan::dsme {

SuperframeConfig SuperframeConfig::from(const DsmeScenarioConfig& cfg) {
  SuperframeConfig c;
  c.superframe_duration = duration_from_seconds(cfg.superframe_duration_s);
  c.superframes_per_msf = cfg.superframes_per_msf;
  c.cap_slots = cfg.cap_slots;
  c.cfp_slots = cfg.cfp_slots;
  c.channels = cfg.channels;
  c.sleep_during_cap = cfg.sleep_during_cap;
  c.guard = duration_from_seconds(cfg.guard_s);
  c.rx_early = duration_from_seconds(cfg.rx_early_s);
  c.colocate_gts = cfg.colocate_gts;
  c.validate();
  return c;
}

void SuperframeConfig::validate() const {
  if (1 + cap_slots + cfp_slots != 16)
    throw std::invalid_argument("superframe needs 1 beacon + cap + cfp = 16 slots");
  if (superframes_per_msf < 1) throw std::invalid_argument("superframes per msf must be >= 1");
  if (channels < 1) throw std::invalid_argument("channel count must be >= 1");
  if (superframe_duration <= Duration{0})
    throw std::invalid_argument("superframe duration must be > 0");
}

Duration SuperframeConfig::cfp_slot_offset(int msf_slot_index) const {
  const int superframe = msf_slot_index / cfp_slots;
  const int slot_in_cfp = msf_slot_index % cfp_slots;
  return superframe * superframe_duration + (1 + cap_slots + slot_in_cfp) * slot_duration();
}

void GtsSchedule::validate(const SuperframeConfig& cfg, int device_count) const {
  std::set<std::pair<int, int>> used_cell;
  std::set<std::pair<int, int>> device_slot;
  for (const GtsCell& c : cells) {
    if (c.msf_slot_index < 0 || c.msf_slot_index >= cfg.cfp_slots_per_msf())
      throw std::invalid_argument("cell slot index outside the CFP region");
    if (c.channel_index < 0 || c.channel_index >= cfg.channels)
      throw std::invalid_argument("cell channel index out of range");
    if (c.sender < 0 || c.sender >= device_count || c.receiver < 0 || c.receiver >= device_count)
      throw std::invalid_argument("cell references unknown device");
    if (!used_cell.insert({c.msf_slot_index, c.channel_index}).second)
      throw std::invalid_argument("two cells share a (slot, channel)");
    if (!device_slot.insert({c.sender, c.msf_slot_index}).second)
      throw std::invalid_argument("device scheduled twice in one slot");
    if (!device_slot.insert({c.receiver, c.msf_slot_index}).second)
      throw std::invalid_argument("device scheduled twice in one slot");
  }
}

GtsSchedule build_schedule(const SuperframeConfig& cfg, std::span<const Flow> flows,
                           int slots_per_flow) {
  if (slots_per_flow < 1) throw std::invalid_argument("slots_per_flow must be >= 1");
  const int total_slots = cfg.cfp_slots_per_msf();
  const int channels = cfg.channels;

  std::map<int, int> receiver_load;
  for (const Flow& f : flows) receiver_load[f.receiver]++;

  // Receiver-constrained flows first; ties keep input order.
  std::vector<int> order(flows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return receiver_load[flows[a].receiver] > receiver_load[flows[b].receiver];
  });

  GtsSchedule schedule;
  std::vector<std::vector<bool>> cell_used(total_slots, std::vector<bool>(channels, false));
  std::map<int, std::set<int>> device_slots;

  for (const int fi : order) {
    const Flow& flow = flows[fi];
    for (int k = 0; k < slots_per_flow; ++k) {
      // Repeated cells spread evenly over the multisuperframe, or sit
      // back-to-back when the schedule mirrors the batch-service model.
      const int preferred = cfg.colocate_gts
                                ? k % total_slots
                                : static_cast<int>((static_cast<std::int64_t>(k) * total_slots) /
                                                   slots_per_flow);
      bool placed = false;
      for (int step = 0; step < total_slots && !placed; ++step) {
        const int slot = (preferred + step) % total_slots;
        if (device_slots[flow.sender].count(slot) || device_slots[flow.receiver].count(slot))
          continue;
        for (int ch = 0; ch < channels; ++ch) {
          if (cell_used[slot][ch]) continue;
          cell_used[slot][ch] = true;
          device_slots[flow.sender].insert(slot);
          device_slots[flow.receiver].insert(slot);
          schedule.cells.push_back(GtsCell{slot, ch, flow.sender, flow.receiver});
          placed = true;
          break;
        }
      }
      if (!placed) {
        std::ostringstream msg;
        const int rx_busy = static_cast<int>(device_slots[flow.receiver].size());
        const int tx_busy = static_cast<int>(device_slots[flow.sender].size());
        std::size_t cells_taken = schedule.cells.size();
        if (rx_busy >= total_slots) {
          msg << "receiver " << flow.receiver << " already occupies all " << total_slots
              << " CFP slot indices (receiver pigeonhole)";
        } else if (tx_busy >= total_slots) {
          msg << "sender " << flow.sender << " already occupies all " << total_slots
              << " CFP slot indices (sender pigeonhole)";
        } else if (cells_taken >= static_cast<std::size_t>(total_slots) * channels) {
          msg << "all " << total_slots * channels
              << " (slot, channel) cells are allocated (slot-space pigeonhole)";
        } else {
          msg << "no feasible (slot, channel) left for flow " << flow.sender << "->"
              << flow.receiver << " under the single-radio constraint";
        }
        throw ScheduleInfeasible(msg.str());
      }
    }
  }
  return schedule;
}

EnqueueOutcome enqueue(DsmeNode& node, MacFrame frame, TimeInstant now) {
  frame.enqueued = now;
  if (node.mac_queue.size() >= node.queue_capacity) return EnqueueOutcome::DroppedOverflow;
  node.mac_queue.push_back(frame);
  return EnqueueOutcome::Queued;
}

std::int64_t channel_hz(int channel_index) {
  return 869'400'000 + static_cast<std::int64_t>(channel_index) * 200'000;
}

SlotAction on_slot_start(DsmeNode& node, const GtsCell& cell, TimeInstant slot_start,
                         const SuperframeConfig& cfg, const phy::PhyParams& phy) {
  SlotAction action;
  if (cell.sender != node.id) throw std::invalid_argument("cell is not owned by this sender");
  auto it = std::find_if(node.mac_queue.begin(), node.mac_queue.end(), [&](const MacFrame& f) {
    return f.receiver == cell.receiver || f.receiver < 0;
  });
  if (it == node.mac_queue.end()) return action;
  const Duration toa = phy::time_on_air(phy, it->phy_payload_bytes);
  action.frame = *it;
  if (cfg.guard + toa > cfg.slot_duration()) {
    action.kind = SlotAction::Kind::Oversize;
    node.mac_queue.erase(it);
    return action;
  }
  action.kind = SlotAction::Kind::Transmit;
  action.tx = phy::Transmission{slot_start + cfg.guard, toa, channel_hz(cell.channel_index),
                                phy.spreading_factor, 14.0, node.id};
  node.mac_queue.erase(it);
  return action;
}

}  // namespace lpwan::dsme

namespace lpwan::dsme_sim {

using dsme::GtsCell;
using dsme::MacFrame;
using dsme::SuperframeConfig;

namespace {

struct CellState {
  std::int64_t last_served_msf = -1;
};

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg)
      : cfg_(cfg),
        sf_(SuperframeConfig::from(cfg.dsme)),
        flows_(),
        frame_(compression::sixlowpan_frame(cfg.data_template, compression::SixlowpanContext{})) {
    for (const auto& f : cfg.resolved_flows()) flows_.push_back(dsme::Flow{f.sensor, f.actuator});
  }

  RunResult run() {
    const Duration duration = cfg_.duration();
    result_.schedule = dsme::build_schedule(sf_, flows_, cfg_.dsme.slots_per_flow);
    result_.schedule.validate(sf_, static_cast<int>(cfg_.devices.size()));

    nodes_.resize(cfg_.devices.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      nodes_[i].id = static_cast<int>(i);
      nodes_[i].queue_capacity = static_cast<std::size_t>(cfg_.dsme.mac_queue_capacity);
    }
    cell_state_.resize(result_.schedule.cells.size());
    for (std::size_t c = 0; c < result_.schedule.cells.size(); ++c) {
      nodes_[result_.schedule.cells[c].sender].tx_cells.push_back(static_cast<int>(c));
      nodes_[result_.schedule.cells[c].receiver].rx_cells.push_back(static_cast<int>(c));
    }
    radio_.resize(cfg_.devices.size());

    schedule_superframe(0);
    for (std::size_t c = 0; c < result_.schedule.cells.size(); ++c)
      schedule_cell_occurrence(static_cast<int>(c), 0);
    for (std::size_t f = 0; f < flows_.size(); ++f) schedule_first_packet(static_cast<int>(f));

    queue_.run_until(TimeInstant{duration});

    for (std::size_t d = 0; d < nodes_.size(); ++d) {
      auto tiled = tile_radio_intervals(static_cast<int>(d), std::move(radio_[d]), duration);
      result_.radio.insert(result_.radio.end(), tiled.begin(), tiled.end());
    }
    return std::move(result_);
  }

 private:
  void schedule_superframe(std::int64_t index) {
    const TimeInstant start{sf_.superframe_duration * index};
    queue_.schedule(start, EventKind::Beacon, [this, index, start] {
      // Every device listens for the beacon; the PAN coordinator itself is
      // ambient and not part of the device list.
      for (std::size_t d = 0; d < nodes_.size(); ++d) {
        add_radio(static_cast<int>(d), RadioState::Rx, start, start + sf_.slot_duration());
        if (!sf_.sleep_during_cap) {
          add_radio(static_cast<int>(d), RadioState::Rx, start + sf_.slot_duration(),
                    start + (1 + sf_.cap_slots) * sf_.slot_duration());
        }
      }
      schedule_superframe(index + 1);
    });
  }

  void schedule_cell_occurrence(int cell_index, std::int64_t msf_index) {
    const GtsCell& cell = result_.schedule.cells[cell_index];
    const TimeInstant slot_start{sf_.msf_duration() * msf_index +
                                 sf_.cfp_slot_offset(cell.msf_slot_index)};
    queue_.schedule(slot_start, EventKind::SlotStart, [this, cell_index, msf_index, slot_start] {
      const GtsCell& c = result_.schedule.cells[cell_index];
      add_radio(c.receiver, RadioState::Rx, slot_start, slot_start + sf_.slot_duration());
      try_serve_cell(cell_index, msf_index, slot_start, slot_start);
      schedule_cell_occurrence(cell_index, msf_index + 1);
    });
  }

  /// One frame per GTS occurrence; transmission may start mid-slot when a
  /// frame arrives while the slot is running and still fits before its end.
  void try_serve_cell(int cell_index, std::int64_t msf_index, TimeInstant slot_start,
                      TimeInstant now) {
    CellState& state = cell_state_[cell_index];
    if (state.last_served_msf >= msf_index) return;
    const GtsCell& cell = result_.schedule.cells[cell_index];
    dsme::DsmeNode& sender = nodes_[cell.sender];
    auto it = std::find_if(sender.mac_queue.begin(), sender.mac_queue.end(),
                           [&](const MacFrame& f) { return f.receiver == cell.receiver; });
    if (it == sender.mac_queue.end()) return;

    const Duration toa = phy::time_on_air(cfg_.phy, it->phy_payload_bytes);
    if (sf_.guard + toa > sf_.slot_duration()) {
      // Cannot ever fit: configuration error surfaced as a deadline loss.
      result_.records[it->record_index].loss = LossCause::Deadline;
      sender.mac_queue.erase(it);
      return;
    }
    const TimeInstant tx_start = std::max(slot_start + sf_.guard, now);
    const TimeInstant tx_end = tx_start + toa;
    if (tx_end > slot_start + sf_.slot_duration()) return;  // wait for the next occurrence

    state.last_served_msf = msf_index;
    MacFrame frame = *it;
    sender.mac_queue.erase(it);

    add_radio(cell.sender, RadioState::Rx, tx_start - sf_.rx_early, tx_start);
    add_radio(cell.sender, RadioState::Tx, tx_start, tx_end);

    PacketRecord& rec = result_.records[frame.record_index];
    rec.uplink_airtimes.emplace_back(tx_start, toa);
    rec.service_slot = slot_start;
    if (tx_end <= TimeInstant{cfg_.duration()}) {
      rec.extracted = tx_end;
      rec.delivered = tx_end;  // TDMA: reception is deterministic
    }
  }

  void schedule_first_packet(int flow_index) {
    RngStream rng(cfg_.seed, static_cast<std::uint64_t>(flow_index));
    const Duration first = first_offset(rng);
    schedule_packet(flow_index, TimeInstant{first}, rng);
  }

  Duration first_offset(RngStream& rng) {
    switch (cfg_.traffic.kind) {
      case TrafficLaw::Kind::Uniform:
      case TrafficLaw::Kind::Exponential: {
        // Desynchronize flow phases over one mean interval.
        const Duration mean = cfg_.traffic.kind == TrafficLaw::Kind::Uniform
                                  ? duration_from_seconds(cfg_.traffic.mean_s)
                                  : duration_from_seconds(1.0 / cfg_.traffic.rate_hz);
        return rng.uniform_duration(Duration{0}, mean - Duration{1});
      }
      case TrafficLaw::Kind::Periodic:
        return duration_from_seconds(cfg_.traffic.phase_s);
    }
    return Duration{0};
  }

  Duration next_interval(RngStream& rng) {
    switch (cfg_.traffic.kind) {
      case TrafficLaw::Kind::Uniform: {
        const Duration mean = duration_from_seconds(cfg_.traffic.mean_s);
        const Duration half = duration_from_seconds(cfg_.traffic.half_range_s);
        return rng.uniform_duration(mean - half, mean + half);
      }
      case TrafficLaw::Kind::Exponential:
        return rng.exponential(duration_from_seconds(1.0 / cfg_.traffic.rate_hz));
      case TrafficLaw::Kind::Periodic:
        return duration_from_seconds(cfg_.traffic.mean_s);
    }
    return Duration{0};
  }

  void schedule_packet(int flow_index, TimeInstant at, RngStream rng) {
    if (at > TimeInstant{cfg_.duration()}) return;
    queue_.schedule(at, EventKind::AppSchedule, [this, flow_index, at, rng]() mutable {
      on_app_packet(flow_index, at);
      schedule_packet(flow_index, at + next_interval(rng), rng);
    });
  }

  void on_app_packet(int flow_index, TimeInstant now) {
    const dsme::Flow& flow = flows_[flow_index];
    PacketRecord rec;
    rec.flow = flow_index;
    rec.scheduled = now;
    const int record_index = static_cast<int>(result_.records.size());
    result_.records.push_back(rec);

    dsme::DsmeNode& sender = nodes_[flow.sender];
    MacFrame frame{record_index, flow.receiver, frame_.total_phy_payload(), now};
    if (dsme::enqueue(sender, frame, now) == dsme::EnqueueOutcome::DroppedOverflow) {
      result_.records[record_index].loss = LossCause::QueueDrop;
      return;
    }
    // The frame may catch a currently running GTS towards its receiver.
    for (const int cell_index : sender.tx_cells) {
      const GtsCell& cell = result_.schedule.cells[cell_index];
      if (cell.receiver != flow.receiver) continue;
      const Duration offset = sf_.cfp_slot_offset(cell.msf_slot_index);
      const std::int64_t msf_index =
          (now.time_since_epoch() - offset).count() / sf_.msf_duration().count();
      if (msf_index < 0) continue;
      const TimeInstant slot_start{sf_.msf_duration() * msf_index + offset};
      if (now < slot_start || now >= slot_start + sf_.slot_duration()) continue;
      try_serve_cell(cell_index, msf_index, slot_start, now);
    }
  }

  void add_radio(int device, RadioState state, TimeInstant start, TimeInstant end) {
    if (start < sim_start) start = sim_start;
    if (end <= start) return;
    radio_[device].push_back(RadioStateInterval{device, state, start, end});
  }

  const ScenarioConfig& cfg_;
  SuperframeConfig sf_;
  std::vector<dsme::Flow> flows_;
  compression::FrameLayout frame_;
  EventQueue queue_;
  RunResult result_;
  std::vector<dsme::DsmeNode> nodes_;
  std::vector<CellState> cell_state_;
  std::vector<std::vector<RadioStateInterval>> radio_;
};

}  // namespace

RunResult simulate(const ScenarioConfig& scenario) {
  scenario.validate();
  Simulator sim(scenario);
  return sim.run();
}

}  // namespace lpwan::dsme_sim
