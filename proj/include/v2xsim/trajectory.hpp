#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "v2xsim/common.hpp"

namespace v2x {

enum class VehicleClass { Car, Truck, Other };

enum class DatasetLayout { HighD, InD };

struct FrameSample {
  int frame = 0;
  double t = 0.0;        // frame / fps
  double x = 0.0;        // meters, network frame after transform
  double y = 0.0;
  double vx = 0.0;       // m/s
  double vy = 0.0;
  double ax = 0.0;       // m/s^2
  double ay = 0.0;
  double speed = 0.0;    // m/s magnitude
  double heading = 0.0;  // degrees CCW from +x, in [0, 360)
};

struct VehicleTrack {
  std::string id;
  VehicleClass cls = VehicleClass::Car;
  double length = 0.0;  // meters
  double width = 0.0;
  std::vector<FrameSample> frames;
  bool parked = false;

  int first_frame() const { return frames.front().frame; }
  int last_frame() const { return frames.back().frame; }
  // Recorded running time, (last frame - first frame) / fps.
  double running_time(double fps) const {
    return (last_frame() - first_frame()) / fps;
  }
};

struct RecordingMeta {
  std::string recording_id;
  int location_id = 0;
  double fps = 25.0;
  Point orig_origin{0.0, 0.0};
  DatasetLayout layout = DatasetLayout::HighD;
};

// Eq.-style pure translation between the recording frame and the network frame.
inline Point transform_coords(Point p_orig, Point orig_origin, Point net_origin) {
  return {net_origin.x - (orig_origin.x - p_orig.x),
          net_origin.y - (orig_origin.y - p_orig.y)};
}

inline double normalize_heading(double deg) {
  double h = std::fmod(deg, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h = 0.0;
  return h;
}

struct ParseOptions {
  double parked_displacement_m = 1.0;  // parked iff total displacement below this
  Point net_origin{0.0, 0.0};          // target frame origin for the transform
};

struct ParseStats {
  std::uint64_t tracks_emitted = 0;
  std::uint64_t vru_skipped = 0;     // pedestrian/bicycle tracks, parsed and dropped
  std::uint64_t parked_count = 0;
  int max_resident_tracks = 0;       // streaming guard: tracks held at once
};

// Streaming recording parser. The tracks CSV is consumed one vehicle chunk at
// a time (both source datasets group rows by vehicle id), so a location with
// tens of thousands of vehicles never requires whole-file residency.
class RecordingParser {
 public:
  RecordingParser(const std::string& tracks_csv, const std::string& tracks_meta_csv,
                  const std::string& recording_meta_csv, ParseOptions opts = {});

  const RecordingMeta& meta() const { return meta_; }
  const ParseStats& stats() const { return stats_; }

  // Emits the next vehicle track, already transformed into the network frame.
  // VRU tracks are skipped (counted). Returns nullopt at end of file.
  std::optional<VehicleTrack> next();

 private:
  struct TrackMetaRow {
    VehicleClass cls = VehicleClass::Car;
    double length = 0.0, width = 0.0;
    bool is_vru = false;
  };

  void parse_recording_meta(const std::string& path);
  void parse_tracks_meta(const std::string& path);
  void detect_layout(const std::vector<std::string>& header);
  FrameSample row_to_sample(const std::vector<std::string>& row);
  VehicleTrack finish_track(std::string id, std::vector<FrameSample> frames);

  RecordingMeta meta_;
  ParseOptions opts_;
  ParseStats stats_;
  std::unordered_map<std::string, TrackMetaRow> track_meta_;
  std::ifstream tracks_in_;
  std::string tracks_path_;
  std::unordered_map<std::string, int> col_;  // header name -> column index
  std::optional<std::vector<std::string>> pending_row_;
  std::uint64_t line_no_ = 1;
};

// Convenience wrapper: parse a whole recording into memory.
std::pair<RecordingMeta, std::vector<VehicleTrack>> parse_recording(
    const std::string& tracks_csv, const std::string& tracks_meta_csv,
    const std::string& recording_meta_csv, ParseOptions opts = {},
    ParseStats* stats_out = nullptr);

// Drops parked tracks; reports how many were removed.
std::vector<VehicleTrack> filter_active(std::vector<VehicleTrack> tracks,
                                        std::size_t* removed = nullptr);

// Total positional displacement used by the parked rule: max distance of any
// frame from the first frame's position.
double track_displacement(const VehicleTrack& t);

}  // namespace v2x
