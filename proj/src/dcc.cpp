#include "v2xsim/dcc.hpp"

#include <algorithm>
#include <limits>

namespace v2x {

const char* to_string(DccStateId s) {
  switch (s) {
    case DccStateId::Relaxed: return "Relaxed";
    case DccStateId::Active1: return "Active1";
    case DccStateId::Active2: return "Active2";
    case DccStateId::Active3: return "Active3";
    case DccStateId::Restrictive: return "Restrictive";
  }
  return "?";
}

DccStateId dcc_state_from_string(const std::string& s) {
  if (s == "Relaxed") return DccStateId::Relaxed;
  if (s == "Active1") return DccStateId::Active1;
  if (s == "Active2") return DccStateId::Active2;
  if (s == "Active3") return DccStateId::Active3;
  if (s == "Restrictive") return DccStateId::Restrictive;
  throw DataError("unknown DCC state: " + s);
}

DccTable DccTable::reactive_default() {
  DccTable t;
  t.rows = {
      {DccStateId::Relaxed, 0.00, 0.060},
      {DccStateId::Active1, 0.30, 0.200},
      {DccStateId::Active2, 0.40, 0.400},
      {DccStateId::Active3, 0.50, 0.500},
      {DccStateId::Restrictive, 0.65, 1.000},
  };
  return t;
}

void DccTable::validate() const {
  if (rows.empty()) throw ValidationError("DCC table must not be empty");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].cbr_threshold <= rows[i - 1].cbr_threshold) {
      throw ValidationError("DCC thresholds must be strictly increasing");
    }
    if (rows[i].toff_s < rows[i - 1].toff_s) {
      throw ValidationError("DCC Toff must be non-decreasing across states");
    }
  }
}

double DccTable::toff(DccStateId id) const {
  for (const Row& r : rows) {
    if (r.id == id) return r.toff_s;
  }
  throw ValidationError("DCC state not present in table");
}

DccStateId dcc_transition(double cbr, const DccTable& table) {
  DccStateId best = table.rows.front().id;
  for (const DccTable::Row& r : table.rows) {
    if (cbr >= r.cbr_threshold) best = r.id;
  }
  return best;
}

void DccGate::on_cbr_window(double cbr) {
  DccStateId candidate = dcc_transition(cbr, table_);
  if (candidate > state_) {
    state_ = candidate;
    below_last_window_ = false;
    // A more restrictive state extends an in-progress wait, never shortens it.
    next_allowed_ = std::max(next_allowed_,
                             last_tx_ + seconds_to_us(table_.toff(state_)));
  } else if (candidate < state_) {
    if (below_last_window_) {
      state_ = candidate;
      below_last_window_ = false;
    } else {
      below_last_window_ = true;
    }
  } else {
    below_last_window_ = false;
  }
}

void DccGate::on_transmit(TimeUs t) {
  last_tx_ = t;
  next_allowed_ = t + seconds_to_us(table_.toff(state_));
}

void RxQueue::drain(TimeUs t) {
  while (!departures_.empty() && departures_.front() <= t) {
    departures_.pop_front();
  }
}

bool RxQueue::offer(TimeUs t) {
  drain(t);
  if (static_cast<int>(departures_.size()) >= depth_) return false;
  TimeUs start = departures_.empty() ? t : std::max(t, departures_.back());
  departures_.push_back(start + service_us_);
  return true;
}

int RxQueue::queued_at(TimeUs t) {
  drain(t);
  return static_cast<int>(departures_.size());
}

}  // namespace v2x
