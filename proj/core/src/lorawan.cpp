#include "lpwan/lorawan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "lpwan/compression.hpp"
#include "lpwan/engine.hpp"
#include "lpwan/event_queue.hpp"
#include "lpwan/rng.hpp"

namespace lpwan::lorawan {

ChannelPlan ChannelPlan::eu868(int uplink_channels) {
  // 868.1/868.3/868.5 plus 867.1..867.9, the eight-channel gateway layout.
  static constexpr std::int64_t base[] = {868'100'000, 868'300'000, 868'500'000, 867'100'000,
                                          867'300'000, 867'500'000, 867'700'000, 867'900'000};
  ChannelPlan plan;
  for (int i = 0; i < uplink_channels; ++i)
    plan.uplink_hz.push_back(i < 8 ? base[i] : 867'900'000 + (i - 7) * 200'000);
  return plan;
}

double DutyCycleBucket::refilled_at(TimeInstant t) const {
  const double dt = as_seconds(t - last_);
  return std::min(capacity_s_, tokens_s_ + rate_ * dt);
}

TimeInstant DutyCycleBucket::earliest_start(TimeInstant now, Duration airtime) const {
  const double need = as_seconds(airtime);
  const double have = refilled_at(now);
  if (have >= need) return now;
  return now + duration_from_seconds((need - have) / rate_);
}

void DutyCycleBucket::consume(TimeInstant at, Duration airtime) {
  tokens_s_ = refilled_at(at) - as_seconds(airtime);
  last_ = at;
}

}  // namespace lpwan::lorawan

namespace lpwan::lorawan_sim {

using lorawan::ChannelPlan;
using lorawan::DutyCycleBucket;

namespace {

constexpr int kBandCount = 3;  // two 1% uplink sub-bands + the 10% RX2 band

struct DownlinkFrame {
  int record_index = -1;
  int bytes = 0;
};

struct PendingWindow {
  TimeInstant at{};
  Duration airtime{};
  bool active = false;
};

struct Device {
  int index = -1;
  DeviceRole role = DeviceRole::Sensor;
  TimeInstant tx_busy_until{};
  phy::Transmission last_tx;
  std::vector<DutyCycleBucket> buckets;
  // class A receive windows
  PendingWindow inbound;      // reserved downlink towards this device
  bool rx1_delivering = false;  // suppresses the RX2 listen
  std::uint64_t poll_seq = 0;
};

struct ServerQueue {
  std::deque<DownlinkFrame> queue;
  TimeInstant next_dequeue{};
  TimeInstant next_tx_start{};
  bool dequeue_scheduled = false;
};

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg)
      : cfg_(cfg),
        class_c_(cfg.stack == StackKind::LorawanClassC),
        plan_(ChannelPlan::eu868(cfg.lorawan.uplink_channels)),
        rx1_delay_(duration_from_seconds(cfg.lorawan.rx1_delay_s)),
        rx2_delay_(duration_from_seconds(cfg.lorawan.rx2_delay_s)),
        throttle_(duration_from_seconds(cfg.lorawan.class_c_throttle_s)),
        uplink_path_(duration_from_seconds(cfg.lorawan.uplink_path_s +
                                           cfg.lorawan.endpoint_processing_s)),
        downlink_path_(duration_from_seconds(cfg.lorawan.downlink_path_s)),
        empty_window_(duration_from_seconds(cfg.lorawan.empty_rx_window_s)) {
    const auto rule = compression::SchcRule::for_template(cfg.data_template);
    data_bytes_ = compression::schc_frame(cfg.data_template, rule).total_phy_payload();
    poll_bytes_ = compression::schc_frame(compression::PacketTemplate::empty_poll(), rule)
                      .total_phy_payload();
    data_toa_ = phy::time_on_air(cfg.phy, data_bytes_);
    poll_toa_ = phy::time_on_air(cfg.phy, poll_bytes_);
  }

  RunResult run() {
    const Duration duration = cfg_.duration();
    flows_ = cfg_.resolved_flows();
    devices_.resize(cfg_.devices.size());
    server_.resize(cfg_.devices.size());
    radio_.resize(cfg_.devices.size());
    for (std::size_t i = 0; i < devices_.size(); ++i) {
      devices_[i].index = static_cast<int>(i);
      devices_[i].role = cfg_.devices[i].role;
      devices_[i].buckets.assign(
          kBandCount, DutyCycleBucket(cfg_.lorawan.duty.device_fraction,
                                      cfg_.lorawan.duty.bucket_window_s));
    }
    gw_buckets_ = {
        DutyCycleBucket(cfg_.lorawan.duty.uplink_band_fraction, cfg_.lorawan.duty.bucket_window_s),
        DutyCycleBucket(cfg_.lorawan.duty.uplink_band_fraction, cfg_.lorawan.duty.bucket_window_s),
        DutyCycleBucket(cfg_.lorawan.duty.rx2_band_fraction, cfg_.lorawan.duty.bucket_window_s)};
    by_channel_.resize(plan_.uplink_hz.size() + 1);

    for (std::size_t f = 0; f < flows_.size(); ++f) schedule_first_packet(static_cast<int>(f));
    if (!class_c_) {
      for (std::size_t d = 0; d < devices_.size(); ++d) {
        if (cfg_.devices[d].role == DeviceRole::Actuator) schedule_first_poll(static_cast<int>(d));
      }
    }

    queue_.run_until(TimeInstant{duration});

    for (std::size_t d = 0; d < devices_.size(); ++d) {
      const RadioState gap = class_c_ ? RadioState::Rx : RadioState::Sleep;
      auto tiled = tile_radio_intervals(static_cast<int>(d), std::move(radio_[d]), duration, gap);
      result_.radio.insert(result_.radio.end(), tiled.begin(), tiled.end());
    }
    return std::move(result_);
  }

 private:
  // ---- traffic --------------------------------------------------------

  void schedule_first_packet(int flow_index) {
    RngStream rng(cfg_.seed, static_cast<std::uint64_t>(flow_index));
    Duration first{};
    switch (cfg_.traffic.kind) {
      case TrafficLaw::Kind::Uniform:
        first = rng.uniform_duration(Duration{0},
                                     duration_from_seconds(cfg_.traffic.mean_s) - Duration{1});
        break;
      case TrafficLaw::Kind::Exponential:
        first = rng.uniform_duration(
            Duration{0}, duration_from_seconds(1.0 / cfg_.traffic.rate_hz) - Duration{1});
        break;
      case TrafficLaw::Kind::Periodic:
        first = duration_from_seconds(cfg_.traffic.phase_s);
        break;
    }
    schedule_packet(flow_index, TimeInstant{first}, rng);
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
      PacketRecord rec;
      rec.flow = flow_index;
      rec.scheduled = at;
      const int record_index = static_cast<int>(result_.records.size());
      result_.records.push_back(rec);
      send_uplink(flows_[flow_index].sensor, record_index, data_bytes_, data_toa_, at);
      schedule_packet(flow_index, at + next_interval(rng), rng);
    });
  }

  // ---- uplinks --------------------------------------------------------

  RngStream& channel_rng(int device) {
    auto it = ch_rng_.find(device);
    if (it == ch_rng_.end())
      it = ch_rng_.emplace(device, RngStream(cfg_.seed, 1'000'000 + 8ull * device)).first;
    return it->second;
  }

  RngStream& poll_rng(int device) {
    auto it = poll_rng_.find(device);
    if (it == poll_rng_.end())
      it = poll_rng_.emplace(device, RngStream(cfg_.seed, 1'000'000 + 8ull * device + 1)).first;
    return it->second;
  }

  /// record_index < 0 marks an empty-payload poll.
  void send_uplink(int device_index, int record_index, int bytes, Duration toa, TimeInstant now) {
    Device& dev = devices_[device_index];
    const int channel = static_cast<int>(channel_rng(device_index).uniform_int(plan_.uplink_hz.size()));
    const int band = plan_.band_of_uplink(channel);

    TimeInstant start = std::max(now, dev.tx_busy_until);
    if (cfg_.lorawan.duty.device_enabled) {
      const TimeInstant allowed = dev.buckets[band].earliest_start(start, toa);
      if (allowed > start) {
        log(now, device_index, "duty-defer", plan_.uplink_hz[channel],
            std::to_string(as_us(allowed - start)) + "us");
        start = allowed;
      }
    }
    dev.tx_busy_until = start + toa;
    queue_.schedule(start, EventKind::TxStart, [this, device_index, record_index, bytes, toa,
                                                channel, band, start] {
      Device& d = devices_[device_index];
      if (cfg_.lorawan.duty.device_enabled) d.buckets[band].consume(start, toa);
      phy::Transmission tx{start, toa, plan_.uplink_hz[channel], cfg_.phy.spreading_factor,
                           cfg_.lorawan.tx_power_dbm, device_index};
      d.last_tx = tx;
      by_channel_[channel].push_back(tx);
      add_radio(device_index, RadioState::Tx, start, start + toa);
      log(start, device_index, record_index < 0 ? "poll-start" : "uplink-start",
          tx.channel_hz, "");
      queue_.schedule(start + toa, EventKind::TxEnd, [this, device_index, record_index, bytes,
                                                      toa, channel, tx] {
        on_uplink_end(device_index, record_index, bytes, toa, channel, tx);
      });
    });
  }

  void on_uplink_end(int device_index, int record_index, int bytes, Duration toa, int channel,
                     const phy::Transmission& tx) {
    (void)bytes;
    const TimeInstant t_end = tx.end();
    const bool collided = has_device_collision(tx, channel);
    const bool gw_busy = gateway_transmitting_during(tx);
    const bool received = !collided && !gw_busy;

    const char* kind = record_index < 0 ? "poll-end" : "uplink-end";
    log(t_end, device_index, kind, tx.channel_hz,
        received ? "received" : (collided ? "uplink-collision" : "gateway-busy"));

    if (record_index >= 0) {
      PacketRecord& rec = result_.records[record_index];
      rec.uplink_airtimes.emplace_back(tx.start, toa);
      if (!received) {
        rec.loss = collided ? LossCause::UplinkCollision : LossCause::GatewayBusy;
      }
    }

    // Class A devices open their receive windows regardless of the uplink
    // outcome; the network server acts only on decoded uplinks.
    if (!class_c_) open_class_a_windows(device_index, t_end, channel);

    if (!received) return;

    if (record_index >= 0) {
      // Data uplink: hand to the SCHC endpoint, which loops a CoAP POST
      // back towards the actuator of the flow.
      const int actuator = flows_[result_.records[record_index].flow].actuator;
      queue_.schedule(t_end + uplink_path_, EventKind::ServerDequeue,
                      [this, record_index, actuator] {
                        PacketRecord& rec = result_.records[record_index];
                        rec.extracted = queue_.now();
                        ns_enqueue_downlink(actuator, DownlinkFrame{record_index, data_bytes_},
                                            queue_.now());
                      });
    }
    ns_on_uplink(device_index, t_end, channel);
  }

  bool has_device_collision(const phy::Transmission& tx, int channel) const {
    const auto& list = by_channel_[channel];
    for (auto it = list.rbegin(); it != list.rend(); ++it) {
      if (it->end() + Duration{2'000'000} < tx.start) break;  // registry is start-ordered
      if (it->source == tx.source && it->start == tx.start) continue;  // self
      if (!phy::overlaps(*it, tx)) continue;
      if (!cfg_.lorawan.capture_enabled ||
          tx.tx_power_dbm - it->tx_power_dbm < cfg_.lorawan.capture_threshold_db)
        return true;
    }
    return false;
  }

  bool gateway_transmitting_during(const phy::Transmission& tx) const {
    for (auto it = gw_tx_.rbegin(); it != gw_tx_.rend(); ++it) {
      if (it->end() <= tx.start) break;  // reservations are start-ordered
      if (it->start < tx.end() && tx.start < it->end()) return true;
    }
    return false;
  }

  // ---- network server -------------------------------------------------

  void ns_on_uplink(int device_index, TimeInstant t_end, int channel) {
    if (class_c_) return;  // class C pushes downlinks via the throttle timer
    ServerQueue& sq = server_[device_index];
    if (sq.queue.empty()) return;
    if (devices_[device_index].inbound.active) return;  // one in-flight downlink per device

    const Duration dl_toa = phy::time_on_air(cfg_.phy, sq.queue.front().bytes);
    const TimeInstant w1 = t_end + rx1_delay_;
    const TimeInstant w2 = t_end + rx2_delay_;
    const int band = plan_.band_of_uplink(channel);

    if (gw_tx_free_at(w1) &&
        (!cfg_.lorawan.duty.gateway_enabled ||
         gw_buckets_[band].earliest_start(w1, dl_toa) <= w1)) {
      dispatch_downlink(device_index, w1, dl_toa, plan_.uplink_hz[channel], channel, band, "rx1");
    } else if (gw_tx_free_at(w2) &&
               (!cfg_.lorawan.duty.gateway_enabled ||
                gw_buckets_[plan_.rx2_band].earliest_start(w2, dl_toa) <= w2)) {
      dispatch_downlink(device_index, w2, dl_toa, plan_.rx2_hz, -1, plan_.rx2_band, "rx2");
    }
    // else defer to the next uplink of this device
  }

  bool gw_tx_free_at(TimeInstant at) const { return gw_busy_until_ <= at; }

  void dispatch_downlink(int device_index, TimeInstant window, Duration dl_toa,
                         std::int64_t channel_hz, int channel_index, int band,
                         const char* window_name) {
    ServerQueue& sq = server_[device_index];
    DownlinkFrame frame = sq.queue.front();
    sq.queue.pop_front();
    sample_queue_depth(device_index);
    const bool frame_pending = !sq.queue.empty();
    if (frame_pending)
      log(queue_.now(), device_index, "frame-pending", channel_hz, "set");

    gw_busy_until_ = window + dl_toa;
    if (cfg_.lorawan.duty.gateway_enabled) gw_buckets_[band].consume(window, dl_toa);

    Device& dev = devices_[device_index];
    dev.inbound = PendingWindow{window, dl_toa, true};

    log(queue_.now(), device_index, std::string(window_name) + "-dispatch", channel_hz, "");
    queue_.schedule(window, EventKind::TxStart, [this, device_index, window, dl_toa, channel_hz,
                                                 channel_index, frame, frame_pending] {
      phy::Transmission tx{window, dl_toa, channel_hz, cfg_.phy.spreading_factor,
                           cfg_.lorawan.tx_power_dbm, kGateway};
      gw_tx_.push_back(tx);
      if (channel_index >= 0) by_channel_[channel_index].push_back(tx);  // RX1 shares uplink air
      queue_.schedule(window + dl_toa, EventKind::TxEnd,
                      [this, device_index, tx, frame, frame_pending] {
                        complete_downlink(device_index, tx, frame, frame_pending);
                      });
    });
  }

  void complete_downlink(int device_index, const phy::Transmission& tx, DownlinkFrame frame,
                         bool frame_pending) {
    Device& dev = devices_[device_index];
    dev.inbound.active = false;

    bool lost = false;
    // RX1 downlinks share the uplink channels and collide with uplinks.
    const int channel_index = uplink_channel_index(tx.channel_hz);
    if (channel_index >= 0) {
      const auto& list = by_channel_[channel_index];
      for (auto it = list.rbegin(); it != list.rend(); ++it) {
        if (it->end() + Duration{2'000'000} < tx.start) break;  // start-ordered registry
        if (it->source == kGateway) continue;
        if (phy::overlaps(*it, tx)) {
          lost = true;
          break;
        }
      }
    }
    // A device cannot receive while its own radio transmits.
    if (!lost && dev.last_tx.airtime > Duration{0} && dev.last_tx.end() > tx.start &&
        dev.last_tx.start < tx.end())
      lost = true;

    if (frame.record_index >= 0) {
      PacketRecord& rec = result_.records[frame.record_index];
      if (lost) {
        rec.loss = LossCause::DownlinkLoss;
      } else if (tx.end() <= TimeInstant{cfg_.duration()}) {
        rec.delivered = tx.end();
      }
    }
    log(tx.end(), device_index, lost ? "downlink-lost" : "downlink-delivered", tx.channel_hz,
        frame_pending ? "frame-pending" : "");

    if (!lost && frame_pending && !class_c_) {
      // Early poll to drain the backlog.
      const Duration jitter = poll_rng(device_index).uniform_duration(
          Duration{0}, duration_from_seconds(cfg_.lorawan.frame_pending_poll_jitter_s));
      schedule_poll(device_index, tx.end() + jitter);
    }
  }

  int uplink_channel_index(std::int64_t hz) const {
    for (std::size_t i = 0; i < plan_.uplink_hz.size(); ++i)
      if (plan_.uplink_hz[i] == hz) return static_cast<int>(i);
    return -1;
  }

  void ns_enqueue_downlink(int actuator, DownlinkFrame frame, TimeInstant now) {
    ServerQueue& sq = server_[actuator];
    if (cfg_.lorawan.downlink_queue_capacity > 0 &&
        sq.queue.size() >= static_cast<std::size_t>(cfg_.lorawan.downlink_queue_capacity)) {
      if (frame.record_index >= 0)
        result_.records[frame.record_index].loss = LossCause::DownlinkLoss;
      log(now, actuator, "dl-drop", 0, "queue-full");
      return;
    }
    sq.queue.push_back(frame);
    sample_queue_depth(actuator);
    log(now, actuator, "dl-enqueue", 0, std::to_string(sq.queue.size()));
    if (class_c_ && !sq.dequeue_scheduled) {
      const TimeInstant at = std::max(now, sq.next_dequeue);
      sq.dequeue_scheduled = true;
      queue_.schedule(at, EventKind::ServerDequeue, [this, actuator] { class_c_dequeue(actuator); });
    }
  }

  void class_c_dequeue(int actuator) {
    ServerQueue& sq = server_[actuator];
    sq.dequeue_scheduled = false;
    if (sq.queue.empty()) return;
    const TimeInstant now = queue_.now();

    const DownlinkFrame frame = sq.queue.front();
    const Duration dl_toa = phy::time_on_air(cfg_.phy, frame.bytes);
    TimeInstant tx_start = std::max(now + downlink_path_, gw_busy_until_);
    tx_start = std::max(tx_start, sq.next_tx_start);
    if (cfg_.lorawan.duty.gateway_enabled)
      tx_start = gw_buckets_[plan_.rx2_band].earliest_start(tx_start, dl_toa);

    sq.queue.pop_front();
    sample_queue_depth(actuator);
    gw_busy_until_ = tx_start + dl_toa;
    if (cfg_.lorawan.duty.gateway_enabled) gw_buckets_[plan_.rx2_band].consume(tx_start, dl_toa);
    sq.next_dequeue = now + throttle_;
    sq.next_tx_start = tx_start + throttle_;
    log(now, actuator, "dequeue", plan_.rx2_hz, "");

    queue_.schedule(tx_start, EventKind::TxStart, [this, actuator, tx_start, dl_toa, frame] {
      phy::Transmission tx{tx_start, dl_toa, plan_.rx2_hz, cfg_.phy.spreading_factor,
                           cfg_.lorawan.tx_power_dbm, kGateway};
      gw_tx_.push_back(tx);
      add_radio(actuator, RadioState::Rx, tx_start, tx_start + dl_toa);
      queue_.schedule(tx_start + dl_toa, EventKind::TxEnd,
                      [this, actuator, tx, frame] { complete_downlink(actuator, tx, frame, false); });
    });

    if (!sq.queue.empty()) {
      sq.dequeue_scheduled = true;
      queue_.schedule(sq.next_dequeue, EventKind::ServerDequeue,
                      [this, actuator] { class_c_dequeue(actuator); });
    }
  }

  // ---- class A polling and receive windows ----------------------------

  void schedule_first_poll(int device_index) {
    const Duration phase = poll_rng(device_index).uniform_duration(
        Duration{0}, duration_from_seconds(cfg_.lorawan.polling_interval_s) - Duration{1});
    schedule_poll(device_index, TimeInstant{phase});
  }

  void schedule_poll(int device_index, TimeInstant at) {
    Device& dev = devices_[device_index];
    const std::uint64_t seq = ++dev.poll_seq;
    if (at > TimeInstant{cfg_.duration()}) return;
    queue_.schedule(at, EventKind::PollTimer, [this, device_index, seq, at] {
      if (devices_[device_index].poll_seq != seq) return;  // superseded
      send_uplink(device_index, -1, poll_bytes_, poll_toa_, at);
      const Duration jitter = poll_rng(device_index).uniform_duration(
          Duration{0}, duration_from_seconds(cfg_.lorawan.poll_jitter_s));
      schedule_poll(device_index,
                    at + duration_from_seconds(cfg_.lorawan.polling_interval_s) + jitter);
    });
  }

  void open_class_a_windows(int device_index, TimeInstant t_end, int channel) {
    (void)channel;
    const TimeInstant w1 = t_end + rx1_delay_;
    const TimeInstant w2 = t_end + rx2_delay_;
    queue_.schedule(w1, EventKind::RxWindowOpen, [this, device_index, w1] {
      Device& dev = devices_[device_index];
      if (dev.inbound.active && dev.inbound.at == w1) {
        dev.rx1_delivering = true;
        add_radio(device_index, RadioState::Rx, w1, w1 + dev.inbound.airtime);
      } else {
        dev.rx1_delivering = false;
        add_radio(device_index, RadioState::Rx, w1, w1 + empty_window_);
      }
    });
    queue_.schedule(w2, EventKind::RxWindowOpen, [this, device_index, w2] {
      Device& dev = devices_[device_index];
      if (dev.rx1_delivering) return;  // nothing more after an RX1 reception
      if (dev.inbound.active && dev.inbound.at == w2) {
        add_radio(device_index, RadioState::Rx, w2, w2 + dev.inbound.airtime);
      } else {
        add_radio(device_index, RadioState::Rx, w2, w2 + empty_window_);
      }
    });
  }

  // ---- bookkeeping ----------------------------------------------------

  void sample_queue_depth(int actuator) {
    result_.downlink_queue_depth.push_back(lorawan::QueueDepthSample{
        actuator, queue_.now(), static_cast<int>(server_[actuator].queue.size())});
  }

  void add_radio(int device, RadioState state, TimeInstant start, TimeInstant end) {
    if (start < sim_start) start = sim_start;
    if (end <= start) return;
    radio_[device].push_back(RadioStateInterval{device, state, start, end});
  }

  void log(TimeInstant t, int device, const std::string& event, std::int64_t channel_hz,
           const std::string& outcome) {
    result_.events.push_back(lorawan::EventLogRow{
        t, device == kGateway ? "gateway" : cfg_.devices[device].id, event, channel_hz, outcome});
  }

  static constexpr int kGateway = -2;

  const ScenarioConfig& cfg_;
  bool class_c_;
  ChannelPlan plan_;
  Duration rx1_delay_, rx2_delay_, throttle_, uplink_path_, downlink_path_, empty_window_;
  int data_bytes_ = 0, poll_bytes_ = 0;
  Duration data_toa_{}, poll_toa_{};

  EventQueue queue_;
  RunResult result_;
  std::vector<ScenarioConfig::ResolvedFlow> flows_;
  std::vector<Device> devices_;
  std::vector<ServerQueue> server_;
  std::vector<std::vector<RadioStateInterval>> radio_;
  std::vector<std::vector<phy::Transmission>> by_channel_;
  std::vector<phy::Transmission> gw_tx_;
  TimeInstant gw_busy_until_{};
  std::map<int, RngStream> ch_rng_;
  std::map<int, RngStream> poll_rng_;
};

}  // namespace

RunResult simulate(const ScenarioConfig& scenario) {
  scenario.validate();
  Simulator sim(scenario);
  return sim.run();
}

}  // namespace lpwan::lorawan_sim
