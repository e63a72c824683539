#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "v2xsim/sim_core.hpp"
#include "v2xsim/trajectory.hpp"

namespace v2x {

// Provenance header written as the first line of every output file:
// "# v2xsim <version> config_hash=<hex> seed=<n>".
std::string provenance_header(std::uint64_t config_hash, std::uint64_t seed);
// Validates and strips a provenance header line; returns its content.
std::string read_provenance_header(std::istream& in, const std::string& path);

// Scenario container: JSON lines. First record is the recording meta, then
// one record per track. Both writer and reader stream track-by-track.
class ScenarioWriter {
 public:
  ScenarioWriter(const std::string& path, const RecordingMeta& meta,
                 std::uint64_t config_hash, std::uint64_t seed);
  void write_track(const VehicleTrack& track);

 private:
  std::ofstream out_;
  std::string path_;
};

class ScenarioReader {
 public:
  explicit ScenarioReader(const std::string& path);
  const RecordingMeta& meta() const { return meta_; }
  std::optional<VehicleTrack> next();

 private:
  std::ifstream in_;
  std::string path_;
  RecordingMeta meta_;
};

Scenario load_scenario(const std::string& path, bool drop_parked = true,
                       std::size_t* parked_removed = nullptr);

// CSV log writers, one file per stream, with the provenance header.
class CamLogWriter {
 public:
  CamLogWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed);
  void write(const CamRecord& r);

 private:
  std::ofstream out_;
};

class ReceptionLogWriter {
 public:
  ReceptionLogWriter(const std::string& path, std::uint64_t config_hash,
                     std::uint64_t seed);
  void write(const ReceptionRecord& r);

 private:
  std::ofstream out_;
};

class CbrLogWriter {
 public:
  CbrLogWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed);
  void write(const CbrRecord& r);

 private:
  std::ofstream out_;
};

std::vector<CamRecord> read_cam_log(const std::string& path);
std::vector<ReceptionRecord> read_reception_log(const std::string& path);
std::vector<CbrRecord> read_cbr_log(const std::string& path);

}  // namespace v2x
