#ifndef LPWAN_EVENT_QUEUE_HPP
#define LPWAN_EVENT_QUEUE_HPP

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lpwan/time.hpp"

namespace lpwan {

enum class EventKind {
  AppSchedule,
  TxStart,
  TxEnd,
  RxWindowOpen,
  Beacon,
  SlotStart,
  ServerDequeue,
  PollTimer,
};

struct Event {
  TimeInstant at;
  std::uint64_t seq;  // ties on `at` resolve in insertion order
  EventKind kind;
  std::function<void()> fn;
};

/// Time-ordered event queue driving a single scenario run.
class EventQueue {
 public:
  void schedule(TimeInstant at, EventKind kind, std::function<void()> fn) {
    if (at < now_) throw std::logic_error("event scheduled in the past");
    heap_.push(Event{at, next_seq_++, kind, std::move(fn)});
  }

  void schedule_in(Duration delay, EventKind kind, std::function<void()> fn) {
    schedule(now_ + delay, kind, std::move(fn));
  }

  TimeInstant now() const { return now_; }

  /// Processes every event with at <= end, in (at, seq) order.
  void run_until(TimeInstant end) {
    while (!heap_.empty() && heap_.top().at <= end) {
      // Event must be popped before running: handlers push new events.
      Event ev = heap_.top();
      heap_.pop();
      now_ = ev.at;
      ev.fn();
    }
    now_ = end;
  }

  bool empty() const { return heap_.empty(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  TimeInstant now_ = sim_start;
};

}  // namespace lpwan

#endif
