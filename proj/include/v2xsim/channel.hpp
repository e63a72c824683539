#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "v2xsim/common.hpp"

namespace v2x {

// Free-space reference loss at 1 m for the given carrier (about 47.86 dB at
// 5.9 GHz).
double free_space_ref_loss_db(double carrier_hz);

struct RadioConfig {
  double carrier_hz = 5.9e9;
  double bandwidth_hz = 10e6;
  double tx_power_dbm = 23.0;  // 200 mW
  double rx_sensitivity_dbm = -82.0;
  double ed_threshold_dbm = -85.0;
  double data_rate_bps = 6e6;
  double pathloss_exponent = 2.0;
  double ref_loss_1m_db = 47.86;
  double capture_sinr_db = 10.0;
  double noise_floor_dbm = -95.0;
  int mac_overhead_bytes = 36;

  void validate() const {
    if (ed_threshold_dbm > rx_sensitivity_dbm) {
      throw ValidationError("energy-detect threshold must not exceed sensitivity");
    }
    if (data_rate_bps <= 0.0) throw ValidationError("data rate must be positive");
  }
};

// 802.11p-style frame airtime at 10 MHz: 40 us preamble + 8 us SIGNAL, then
// OFDM symbols of 8 us carrying (16 service + 6 tail + 8*(payload + MAC
// overhead)) bits at data_rate * 8 us bits per symbol.
double airtime_s(int payload_bytes, const RadioConfig& cfg);
TimeUs airtime_us(int payload_bytes, const RadioConfig& cfg);

// Log-distance path loss with the distance clamped at the 1 m reference.
double rx_power_dbm(double tx_power_dbm, double distance_m, const RadioConfig& cfg);

// Closed-form distance where rx power crosses the given threshold.
double range_for_threshold_m(double threshold_dbm, const RadioConfig& cfg);
inline double delivery_range_m(const RadioConfig& cfg) {
  return range_for_threshold_m(cfg.rx_sensitivity_dbm, cfg);
}
inline double ed_range_m(const RadioConfig& cfg) {
  return range_for_threshold_m(cfg.ed_threshold_dbm, cfg);
}

enum class RxVerdict { Delivered, BelowSensitivity, Collided, RxSuppressed };
const char* to_string(RxVerdict v);
RxVerdict rx_verdict_from_string(const std::string& s);

struct Transmission {
  std::uint32_t sender = 0;  // vehicle index within the scenario
  TimeUs start = 0;
  TimeUs end = 0;  // start + airtime
  Point pos;       // sender position at start
  int payload_bytes = 0;
  std::uint32_t seq = 0;
};

struct Candidate {
  std::uint32_t receiver = 0;
  Point pos;
  bool transmitting = false;  // half-duplex: overlapped own tx kills the frame
};

struct ReceptionOutcome {
  std::uint32_t receiver = 0;
  RxVerdict verdict = RxVerdict::BelowSensitivity;
  double rx_dbm = 0.0;
  double distance_m = 0.0;
};

// PHY outcome per candidate receiver. interferers are the co-overlapping
// transmissions (excluding tx itself); their powers sum in the linear domain
// against the noise floor for the SINR capture check.
std::vector<ReceptionOutcome> resolve_receptions(
    const Transmission& tx, std::span<const Candidate> candidates,
    std::span<const Transmission> interferers, const RadioConfig& cfg);

// True iff the linear power sum of the given transmissions at this position
// reaches the energy-detect threshold.
bool carrier_busy(Point pos, std::span<const Transmission> active,
                  const RadioConfig& cfg);

}  // namespace v2x
