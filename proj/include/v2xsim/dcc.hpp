#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "v2xsim/common.hpp"

namespace v2x {

// Sliding channel-busy-ratio meter: per window, the busy fraction is folded
// into an exponentially smoothed CBR.
struct CbrMeter {
  double window_s = 0.100;
  double alpha = 0.5;
  double cbr = 0.0;

  void update(double busy_fraction) {
    cbr = alpha * cbr + (1.0 - alpha) * busy_fraction;
  }
};

enum class DccStateId { Relaxed, Active1, Active2, Active3, Restrictive };
const char* to_string(DccStateId s);
DccStateId dcc_state_from_string(const std::string& s);

struct DccTable {
  struct Row {
    DccStateId id = DccStateId::Relaxed;
    double cbr_threshold = 0.0;  // entry threshold (state holds for CBR >= it)
    double toff_s = 0.0;         // minimum inter-transmission time
  };
  std::vector<Row> rows;  // ordered Relaxed..Restrictive

  // Reactive state table per the ETSI TS 102 687 reactive annex.
  static DccTable reactive_default();
  void validate() const;
  double toff(DccStateId id) const;
};

// Pure state selection: highest state whose entry threshold is <= cbr.
DccStateId dcc_transition(double cbr, const DccTable& table);

// Transmit gate with per-state Toff and one-window downward hysteresis. A
// state change mid-wait never shortens the wait already in progress.
class DccGate {
 public:
  explicit DccGate(DccTable table) : table_(std::move(table)) {
    table_.validate();
  }

  DccStateId state() const { return state_; }

  void on_cbr_window(double cbr);
  bool gate_open(TimeUs t) const { return t >= next_allowed_; }
  void on_transmit(TimeUs t);

 private:
  DccTable table_;
  DccStateId state_ = DccStateId::Relaxed;
  bool below_last_window_ = false;
  TimeUs last_tx_ = std::numeric_limits<TimeUs>::min() / 2;
  TimeUs next_allowed_ = std::numeric_limits<TimeUs>::min() / 2;
};

struct SuppressionCounters {
  std::uint64_t tx_attempts = 0;
  std::uint64_t tx_suppressed = 0;
  std::uint64_t rx_offered = 0;
  std::uint64_t rx_suppressed = 0;

  double tx_ratio() const {
    return tx_attempts == 0 ? 0.0
                            : static_cast<double>(tx_suppressed) / tx_attempts;
  }
  double rx_ratio() const {
    return rx_offered == 0 ? 0.0
                           : static_cast<double>(rx_suppressed) / rx_offered;
  }
  SuppressionCounters& operator+=(const SuppressionCounters& o) {
    tx_attempts += o.tx_attempts;
    tx_suppressed += o.tx_suppressed;
    rx_offered += o.rx_offered;
    rx_suppressed += o.rx_suppressed;
    return *this;
  }
};

// Bounded receive queue drained by a single deterministic server. Arrivals to
// a full queue are suppressed.
class RxQueue {
 public:
  RxQueue(int depth = 8, TimeUs service_us = 1000)
      : depth_(depth), service_us_(service_us) {}

  // True if the arrival was accepted, false if suppressed.
  bool offer(TimeUs t);
  int queued_at(TimeUs t);

 private:
  void drain(TimeUs t);
  int depth_;
  TimeUs service_us_;
  std::deque<TimeUs> departures_;
};

}  // namespace v2x
