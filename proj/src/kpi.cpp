#include "v2xsim/kpi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace v2x {

std::size_t DistanceBins::bin(double d) const {
  std::size_t i = 0;
  while (i < edges.size() && d >= edges[i]) ++i;
  return i;
}

std::string DistanceBins::label(std::size_t i) const {
  std::ostringstream s;
  if (i == 0) {
    s << "0-" << edges.front() << "m";
  } else if (i < edges.size()) {
    s << edges[i - 1] << "-" << edges[i] << "m";
  } else {
    s << edges.back() << "m+";
  }
  return s.str();
}

void DistanceBins::validate() const {
  if (edges.empty()) throw ValidationError("distance bins need at least one edge");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) {
      throw ValidationError("distance bin edges must be strictly increasing");
    }
  }
}

IggResult igg(std::span<const CamRecord> cam_log) {
  std::map<std::string, std::vector<TimeUs>> times;
  for (const CamRecord& c : cam_log) times[c.sender].push_back(c.t);
  IggResult res;
  double sum = 0.0;
  std::size_t n = 0;
  for (auto& [sender, ts] : times) {
    if (ts.size() < 2) {
      ++res.excluded;
      continue;
    }
    double gap_sum = 0.0;
    for (std::size_t i = 1; i < ts.size(); ++i) {
      gap_sum += us_to_seconds(ts[i] - ts[i - 1]);
    }
    double mean = gap_sum / (ts.size() - 1);
    res.per_vehicle[sender] = mean;
    sum += mean;
    ++n;
  }
  res.location_mean = n > 0 ? sum / n : 0.0;
  return res;
}

IpgResult ipg(std::span<const ReceptionRecord> rx_log, const DistanceBins& bins) {
  bins.validate();
  std::map<std::pair<std::string, std::string>, TimeUs> last_rx;
  IpgResult res;
  res.per_bin_mean.assign(bins.count(), std::numeric_limits<double>::quiet_NaN());
  res.per_bin_count.assign(bins.count(), 0);
  std::vector<double> bin_sum(bins.count(), 0.0);
  double all_sum = 0.0;
  std::size_t all_n = 0;
  for (const ReceptionRecord& r : rx_log) {
    if (r.verdict != RxVerdict::Delivered) continue;
    auto key = std::make_pair(r.sender, r.receiver);
    auto it = last_rx.find(key);
    if (it != last_rx.end()) {
      double gap = us_to_seconds(r.t_rx - it->second);
      std::size_t b = bins.bin(r.distance_m);
      bin_sum[b] += gap;
      ++res.per_bin_count[b];
      all_sum += gap;
      ++all_n;
      it->second = r.t_rx;
    } else {
      last_rx.emplace(key, r.t_rx);
    }
  }
  for (std::size_t b = 0; b < bins.count(); ++b) {
    if (res.per_bin_count[b] > 0) {
      res.per_bin_mean[b] = bin_sum[b] / res.per_bin_count[b];
    }
  }
  res.overall_mean = all_n > 0 ? all_sum / all_n : 0.0;
  return res;
}

std::optional<double> pdr(std::span<const ReceptionRecord> rx_log,
                          double awareness_range_m) {
  std::uint64_t offered = 0;
  std::uint64_t delivered = 0;
  for (const ReceptionRecord& r : rx_log) {
    if (r.distance_m > awareness_range_m) continue;
    ++offered;
    if (r.verdict == RxVerdict::Delivered) ++delivered;
  }
  if (offered == 0) return std::nullopt;
  return static_cast<double>(delivered) / offered;
}

std::map<CamCause, double> cause_histogram(std::span<const CamRecord> cam_log) {
  std::map<CamCause, double> hist;
  if (cam_log.empty()) return hist;
  for (const CamRecord& c : cam_log) hist[c.cause] += 1.0;
  for (auto& [cause, v] : hist) v /= cam_log.size();
  return hist;
}

CbrStats cbr_stats(std::span<const CbrRecord> cbr_log) {
  CbrStats res;
  double sum = 0.0;
  std::map<TimeUs, std::pair<double, std::pair<int, int>>> by_window;  // sum, (n, count)
  for (const CbrRecord& r : cbr_log) {
    sum += r.cbr;
    auto& w = by_window[r.t];
    w.first += r.cbr;
    w.second.first += 1;
    w.second.second = r.active_vehicles;
  }
  res.mean = cbr_log.empty() ? 0.0 : sum / cbr_log.size();
  for (const auto& [t, w] : by_window) {
    res.series.push_back(
        CbrSeriesPoint{us_to_seconds(t), w.second.second, w.first / w.second.first});
  }
  return res;
}

KpiReport compute_kpi_report(int location_id, std::span<const CamRecord> cams,
                             std::span<const ReceptionRecord> receptions,
                             std::span<const CbrRecord> cbr_log,
                             const SuppressionCounters& suppression,
                             const DistanceBins& bins, double awareness_range_m) {
  KpiReport rep;
  rep.location_id = location_id;
  rep.mean_igg_s = igg(cams).location_mean;
  IpgResult ip = ipg(receptions, bins);
  rep.mean_ipg_s = ip.overall_mean;
  rep.ipg_per_bin_s = ip.per_bin_mean;
  for (std::size_t b = 0; b < bins.count(); ++b) rep.bin_labels.push_back(bins.label(b));
  rep.pdr = pdr(receptions, awareness_range_m);
  rep.cause_fractions = cause_histogram(cams);
  CbrStats cs = cbr_stats(cbr_log);
  rep.mean_cbr = cs.mean;
  rep.cbr_series = std::move(cs.series);
  rep.tx_suppression = suppression.tx_ratio();
  rep.rx_suppression = suppression.rx_ratio();
  return rep;
}

std::string kpi_report_to_json(const KpiReport& r) {
  nlohmann::json j;
  j["location"] = r.location_id;
  j["mean_igg_s"] = r.mean_igg_s;
  j["mean_ipg_s"] = r.mean_ipg_s;
  j["ipg_per_bin_s"] = nlohmann::json::object();
  for (std::size_t b = 0; b < r.bin_labels.size(); ++b) {
    if (std::isnan(r.ipg_per_bin_s[b])) {
      j["ipg_per_bin_s"][r.bin_labels[b]] = nullptr;
    } else {
      j["ipg_per_bin_s"][r.bin_labels[b]] = r.ipg_per_bin_s[b];
    }
  }
  if (r.pdr) j["pdr"] = *r.pdr; else j["pdr"] = nullptr;
  j["cause_fractions"] = nlohmann::json::object();
  for (const auto& [cause, frac] : r.cause_fractions) {
    j["cause_fractions"][to_string(cause)] = frac;
  }
  j["mean_cbr"] = r.mean_cbr;
  j["tx_suppression"] = r.tx_suppression;
  j["rx_suppression"] = r.rx_suppression;
  return j.dump(1);
}

std::string kpi_report_to_csv(const KpiReport& r) {
  std::ostringstream out;
  out << "location,metric,key,value\n";
  auto row = [&](const std::string& metric, const std::string& key, double v) {
    out << r.location_id << "," << metric << "," << key << "," << v << "\n";
  };
  row("igg", "mean_s", r.mean_igg_s);
  row("ipg", "mean_s", r.mean_ipg_s);
  for (std::size_t b = 0; b < r.bin_labels.size(); ++b) {
    if (!std::isnan(r.ipg_per_bin_s[b])) row("ipg", r.bin_labels[b], r.ipg_per_bin_s[b]);
  }
  if (r.pdr) row("pdr", "fraction", *r.pdr);
  for (const auto& [cause, frac] : r.cause_fractions) {
    row("cause", to_string(cause), frac);
  }
  row("cbr", "mean", r.mean_cbr);
  row("dcc", "tx_suppression", r.tx_suppression);
  row("dcc", "rx_suppression", r.rx_suppression);
  return out.str();
}

}  // namespace v2x
