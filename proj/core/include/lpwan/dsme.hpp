#ifndef LPWAN_DSME_HPP
#define LPWAN_DSME_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpwan/phy.hpp"
#include "lpwan/scenario.hpp"
#include "lpwan/time.hpp"

namespace lpwan::dsme {

/// Superframe structure: 16 slots (1 beacon + CAP + CFP), optionally
/// grouped into a multisuperframe.
struct SuperframeConfig {
  Duration superframe_duration{3'840'000};
  int superframes_per_msf = 1;
  int cap_slots = 8;
  int cfp_slots = 7;
  int channels = 4;
  bool sleep_during_cap = true;
  Duration guard{10'000};
  Duration rx_early{20'000};
  bool colocate_gts = false;

  static SuperframeConfig from(const DsmeScenarioConfig& cfg);

  void validate() const;
  Duration slot_duration() const { return superframe_duration / 16; }
  Duration msf_duration() const { return superframe_duration * superframes_per_msf; }
  int cfp_slots_per_msf() const { return cfp_slots * superframes_per_msf; }
  /// Offset of a global CFP slot index within its multisuperframe.
  Duration cfp_slot_offset(int msf_slot_index) const;
};

/// One guaranteed (time slot, channel) cell.
struct GtsCell {
  int msf_slot_index = 0;
  int channel_index = 0;
  int sender = -1;
  int receiver = -1;
};

struct ScheduleInfeasible : std::runtime_error {
  explicit ScheduleInfeasible(const std::string& certificate)
      : std::runtime_error(certificate) {}
};

struct GtsSchedule {
  std::vector<GtsCell> cells;

  /// Checks the invariants: unique (slot, channel) cells, and no device in
  /// two cells with the same slot index.
  void validate(const SuperframeConfig& cfg, int device_count) const;
};

struct Flow {
  int sender = -1;
  int receiver = -1;
};

/// Deterministic greedy allocation: flows ordered by receiver load
/// (descending) then input order, cells placed at the first feasible
/// (slot, channel) scanning from an evenly spread starting slot. Throws
/// ScheduleInfeasible with a pigeonhole certificate when allocation fails.
GtsSchedule build_schedule(const SuperframeConfig& cfg, std::span<const Flow> flows,
                           int slots_per_flow);

struct MacFrame {
  int record_index = -1;
  int receiver = -1;
  int phy_payload_bytes = 0;
  TimeInstant enqueued{};
};

struct DsmeNode {
  int id = -1;
  bool coordinator = false;
  std::deque<MacFrame> mac_queue;
  std::size_t queue_capacity = 16;
  std::vector<int> tx_cells;  // indices into the schedule
  std::vector<int> rx_cells;
};

enum class EnqueueOutcome { Queued, DroppedOverflow };

/// FIFO enqueue; a full queue drops the newest frame.
EnqueueOutcome enqueue(DsmeNode& node, MacFrame frame, TimeInstant now);

struct SlotAction {
  enum class Kind { None, Transmit, Oversize };
  Kind kind = Kind::None;
  phy::Transmission tx;
  MacFrame frame;
};

/// Service at a GTS start: transmits the oldest queued frame destined to
/// the cell's receiver when it fits in the slot after the guard time;
/// reports Oversize (a configuration error) when it never can.
SlotAction on_slot_start(DsmeNode& node, const GtsCell& cell, TimeInstant slot_start,
                         const SuperframeConfig& cfg, const phy::PhyParams& phy);

/// Carrier frequency of a DSME channel index.
std::int64_t channel_hz(int channel_index);

}  // namespace lpwan::dsme

#endif
