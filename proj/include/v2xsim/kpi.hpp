#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v2xsim/sim_core.hpp"

namespace v2x {

struct DistanceBins {
  // Interior edges in meters; bins are [0,e0), [e0,e1), ..., [e_last, inf).
  std::vector<double> edges;

  static DistanceBins highway_default() { return {{100.0, 200.0}}; }
  static DistanceBins urban_default() { return {{50.0, 150.0}}; }

  std::size_t count() const { return edges.size() + 1; }
  std::size_t bin(double d) const;
  std::string label(std::size_t i) const;
  void validate() const;
};

struct IggResult {
  double location_mean = 0.0;  // seconds, mean over included vehicles
  std::map<std::string, double> per_vehicle;
  std::size_t excluded = 0;  // vehicles with fewer than 2 CAMs
};

// Mean inter-generation gap per vehicle and per location. The log must be
// time-sorted.
IggResult igg(std::span<const CamRecord> cam_log);

struct IpgResult {
  double overall_mean = 0.0;  // seconds
  std::vector<double> per_bin_mean;   // NaN where a bin has no gaps
  std::vector<std::size_t> per_bin_count;
};

// Gaps between consecutive Delivered packets per ordered (tx, rx) pair; each
// gap is binned by the tx-rx distance at the later reception.
IpgResult ipg(std::span<const ReceptionRecord> rx_log, const DistanceBins& bins);

// Delivered / offered-within-awareness-range. Undefined (nullopt) when no
// receiver was ever within range at transmit time.
std::optional<double> pdr(std::span<const ReceptionRecord> rx_log,
                          double awareness_range_m);

std::map<CamCause, double> cause_histogram(std::span<const CamRecord> cam_log);

struct CbrSeriesPoint {
  double t_s = 0.0;
  int vehicles = 0;
  double cbr = 0.0;  // mean smoothed CBR over vehicles in this window
};

struct CbrStats {
  double mean = 0.0;  // over all per-vehicle samples
  std::vector<CbrSeriesPoint> series;
};

CbrStats cbr_stats(std::span<const CbrRecord> cbr_log);

struct KpiReport {
  int location_id = 0;
  double mean_igg_s = 0.0;
  double mean_ipg_s = 0.0;
  std::vector<std::string> bin_labels;
  std::vector<double> ipg_per_bin_s;
  std::optional<double> pdr;
  std::map<CamCause, double> cause_fractions;
  double mean_cbr = 0.0;
  double tx_suppression = 0.0;
  double rx_suppression = 0.0;
  std::vector<CbrSeriesPoint> cbr_series;
};

KpiReport compute_kpi_report(int location_id, std::span<const CamRecord> cams,
                             std::span<const ReceptionRecord> receptions,
                             std::span<const CbrRecord> cbr_log,
                             const SuppressionCounters& suppression,
                             const DistanceBins& bins, double awareness_range_m);

std::string kpi_report_to_json(const KpiReport& r);
// Flat CSV rows: location,metric,key,value (one row per metric entry).
std::string kpi_report_to_csv(const KpiReport& r);

}  // namespace v2x
