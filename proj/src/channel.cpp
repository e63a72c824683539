#include "v2xsim/channel.hpp"

#include <cmath>

namespace v2x {

namespace {
constexpr double kSpeedOfLight = 299'792'458.0;
constexpr double kPreambleUs = 40.0;
constexpr double kSignalUs = 8.0;
constexpr double kSymbolUs = 8.0;
constexpr int kServiceBits = 16;
constexpr int kTailBits = 6;
}  // namespace

double free_space_ref_loss_db(double carrier_hz) {
  return 20.0 * std::log10(4.0 * M_PI * carrier_hz / kSpeedOfLight);
}

double airtime_s(int payload_bytes, const RadioConfig& cfg) {
  int bits = kServiceBits + kTailBits + 8 * (payload_bytes + cfg.mac_overhead_bytes);
  double bits_per_symbol = cfg.data_rate_bps * kSymbolUs * 1e-6;
  double symbols = std::ceil(bits / bits_per_symbol);
  return (kPreambleUs + kSignalUs + symbols * kSymbolUs) * 1e-6;
}

TimeUs airtime_us(int payload_bytes, const RadioConfig& cfg) {
  return seconds_to_us(airtime_s(payload_bytes, cfg));
}

double rx_power_dbm(double tx_power_dbm, double distance_m, const RadioConfig& cfg) {
  double d = std::max(distance_m, 1.0);
  return tx_power_dbm -
         (cfg.ref_loss_1m_db + 10.0 * cfg.pathloss_exponent * std::log10(d));
}

double range_for_threshold_m(double threshold_dbm, const RadioConfig& cfg) {
  double margin = cfg.tx_power_dbm - cfg.ref_loss_1m_db - threshold_dbm;
  return std::pow(10.0, margin / (10.0 * cfg.pathloss_exponent));
}

const char* to_string(RxVerdict v) {
  switch (v) {
    case RxVerdict::Delivered: return "Delivered";
    case RxVerdict::BelowSensitivity: return "BelowSensitivity";
    case RxVerdict::Collided: return "Collided";
    case RxVerdict::RxSuppressed: return "RxSuppressed";
  }
  return "?";
}

RxVerdict rx_verdict_from_string(const std::string& s) {
  if (s == "Delivered") return RxVerdict::Delivered;
  if (s == "BelowSensitivity") return RxVerdict::BelowSensitivity;
  if (s == "Collided") return RxVerdict::Collided;
  if (s == "RxSuppressed") return RxVerdict::RxSuppressed;
  throw DataError("unknown reception verdict: " + s);
}

std::vector<ReceptionOutcome> resolve_receptions(
    const Transmission& tx, std::span<const Candidate> candidates,
    std::span<const Transmission> interferers, const RadioConfig& cfg) {
  std::vector<ReceptionOutcome> out;
  out.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    if (c.receiver == tx.sender) continue;
    ReceptionOutcome r;
    r.receiver = c.receiver;
    r.distance_m = distance(tx.pos, c.pos);
    r.rx_dbm = rx_power_dbm(cfg.tx_power_dbm, r.distance_m, cfg);
    if (r.rx_dbm < cfg.rx_sensitivity_dbm) {
      r.verdict = RxVerdict::BelowSensitivity;
    } else if (c.transmitting) {
      r.verdict = RxVerdict::Collided;  // half-duplex
    } else {
      double interference_mw = 0.0;
      for (const Transmission& i : interferers) {
        if (i.sender == tx.sender && i.start == tx.start) continue;
        if (i.start >= tx.end || i.end <= tx.start) continue;
        double d = distance(i.pos, c.pos);
        interference_mw += dbm_to_mw(rx_power_dbm(cfg.tx_power_dbm, d, cfg));
      }
      double sinr_db =
          r.rx_dbm - mw_to_dbm(dbm_to_mw(cfg.noise_floor_dbm) + interference_mw);
      r.verdict = sinr_db >= cfg.capture_sinr_db ? RxVerdict::Delivered
                                                 : RxVerdict::Collided;
    }
    out.push_back(r);
  }
  return out;
}

bool carrier_busy(Point pos, std::span<const Transmission> active,
                  const RadioConfig& cfg) {
  double sum_mw = 0.0;
  for (const Transmission& t : active) {
    double d = distance(t.pos, pos);
    sum_mw += dbm_to_mw(rx_power_dbm(cfg.tx_power_dbm, d, cfg));
  }
  if (sum_mw <= 0.0) return false;
  return mw_to_dbm(sum_mw) >= cfg.ed_threshold_dbm;
}

}  // namespace v2x
