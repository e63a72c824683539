#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "v2xsim/cam_engine.hpp"
#include "v2xsim/channel.hpp"
#include "v2xsim/common.hpp"
#include "v2xsim/dcc.hpp"
#include "v2xsim/trajectory.hpp"

namespace v2x {

enum class CsmaMode { Ideal, Csma };
const char* to_string(CsmaMode m);
CsmaMode csma_mode_from_string(const std::string& s);

struct DccParams {
  DccTable table = DccTable::reactive_default();
  double cbr_window_s = 0.100;
  double cbr_alpha = 0.5;
  int rx_queue_depth = 8;
  double rx_service_s = 0.001;
};

struct SimConfig {
  RadioConfig radio;
  CamConfig cam;
  DccParams dcc;
  CsmaMode csma = CsmaMode::Csma;
  std::uint64_t seed = 1;
  double aifs_s = 58e-6;
  double slot_s = 13e-6;
  int backoff_slots = 16;  // uniform 0..slots-1
};

struct Scenario {
  RecordingMeta meta;
  std::vector<VehicleTrack> tracks;  // active (non-parked) tracks
};

struct CamRecord {
  std::string sender;
  std::uint32_t seq = 0;
  TimeUs t = 0;
  double x = 0.0, y = 0.0, speed = 0.0, heading = 0.0;
  int size_bytes = 0;
  CamCause cause = CamCause::TimeElapsed;
};

struct ReceptionRecord {
  std::string receiver;
  std::string sender;
  std::uint32_t seq = 0;
  TimeUs t_rx = 0;
  RxVerdict verdict = RxVerdict::BelowSensitivity;
  double rx_dbm = 0.0;
  double distance_m = 0.0;
};

struct CbrRecord {
  TimeUs t = 0;
  std::string vehicle;
  double cbr = 0.0;
  int active_vehicles = 0;
};

struct SimSinks {
  std::function<void(const CamRecord&)> cam;
  std::function<void(const ReceptionRecord&)> reception;
  std::function<void(const CbrRecord&)> cbr;
};

struct SimResult {
  SuppressionCounters suppression;
  std::uint64_t cam_count = 0;
  std::uint64_t tx_count = 0;
  std::uint64_t reception_count = 0;
  std::uint64_t delivered_count = 0;
  // Replayed running time per vehicle (trace-driven, so equal to the
  // recorded span by construction). Feeds conversion_report.
  std::map<std::string, double> replayed_times;
};

// Uniform-grid broad phase over vehicle positions. Queries are exact: the
// candidate set is filtered by true distance.
class VehicleGrid {
 public:
  void build(std::span<const Point> positions, std::span<const std::uint32_t> ids,
             double cell_size);
  void query(Point p, double radius, std::vector<std::uint32_t>& out) const;

 private:
  double cell_size_ = 1.0;
  double min_x_ = 0.0, min_y_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<std::uint32_t>> cells_;
  std::vector<Point> pos_;
  std::vector<std::uint32_t> id_of_;
};

// Single-threaded deterministic event world for one scenario.
class Simulator {
 public:
  Simulator(const Scenario& scenario, SimConfig config, SimSinks sinks);
  SimResult run();

 private:
  struct Impl;
  const Scenario& scenario_;
  SimConfig config_;
  SimSinks sinks_;
};

}  // namespace v2x
