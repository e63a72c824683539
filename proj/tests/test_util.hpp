#pragma once

#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "v2xsim/road_network.hpp"
#include "v2xsim/trajectory.hpp"

namespace v2x::testutil {

// Brute-force nearest-node oracle with the same tie-break (distance, then id).
inline std::pair<const Node*, double> nearest_scan(const RoadNetwork& net, Point p) {
  const Node* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Node& n : net.nodes()) {
    double d = std::hypot(p.x - n.x, p.y - n.y);
    if (d < best_d || (d == best_d && (best == nullptr || n.id < best->id))) {
      best = &n;
      best_d = d;
    }
  }
  return {best, best_d};
}

// Straight-line track along +x: constant speed, heading 0.
inline VehicleTrack straight_track(const std::string& id, double speed_mps,
                                   int first_frame, int n_frames, double y = 0.0,
                                   double x0 = 0.0, double fps = 25.0) {
  VehicleTrack t;
  t.id = id;
  for (int i = 0; i < n_frames; ++i) {
    FrameSample s;
    s.frame = first_frame + i;
    s.t = s.frame / fps;
    s.x = x0 + i * speed_mps / fps;
    s.y = y;
    s.vx = speed_mps;
    s.speed = speed_mps;
    s.heading = 0.0;
    t.frames.push_back(s);
  }
  return t;
}

inline VehicleTrack stationary_track(const std::string& id, Point pos,
                                     int first_frame, int n_frames,
                                     double fps = 25.0) {
  VehicleTrack t;
  t.id = id;
  for (int i = 0; i < n_frames; ++i) {
    FrameSample s;
    s.frame = first_frame + i;
    s.t = s.frame / fps;
    s.x = pos.x;
    s.y = pos.y;
    t.frames.push_back(s);
  }
  return t;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("v2xsim_test_" + std::to_string(counter()++) + "_" +
             std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

// Minimal HighD-layout recording fixture. Each track entry is (id, class,
// frames of (frame, x, y, vx, vy)).
struct HighDTrackSpec {
  std::string id;
  std::string cls = "Car";
  std::vector<std::array<double, 5>> rows;  // frame,x,y,vx,vy
};

inline void write_highd_fixture(const TempDir& dir,
                                const std::vector<HighDTrackSpec>& tracks,
                                int location_id = 1) {
  std::ofstream t(dir.file("tracks.csv"));
  t << "frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,yAcceleration,"
       "laneId\n";
  for (const auto& spec : tracks) {
    for (const auto& r : spec.rows) {
      t << static_cast<long>(r[0]) << "," << spec.id << "," << r[1] << "," << r[2]
        << ",0,0," << r[3] << "," << r[4] << ",0,0,2\n";
    }
  }
  std::ofstream m(dir.file("tracksMeta.csv"));
  m << "id,width,height,initialFrame,finalFrame,numFrames,class\n";
  for (const auto& spec : tracks) {
    m << spec.id << ",4.5,2.0," << static_cast<long>(spec.rows.front()[0]) << ","
      << static_cast<long>(spec.rows.back()[0]) << "," << spec.rows.size() << ","
      << spec.cls << "\n";
  }
  std::ofstream r(dir.file("recordingMeta.csv"));
  r << "id,frameRate,locationId,speedLimit\n";
  r << "01,25," << location_id << ",33.33\n";
}

}  // namespace v2x::testutil
