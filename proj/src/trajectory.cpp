#include "v2xsim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace v2x {
namespace {

// The source CSVs carry no quoting or embedded separators; a plain split is
// all that is needed.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool read_line(std::ifstream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r") return true;
  }
  return false;
}

std::unordered_map<std::string, int> index_header(const std::vector<std::string>& h) {
  std::unordered_map<std::string, int> idx;
  for (int i = 0; i < static_cast<int>(h.size()); ++i) idx[h[i]] = i;
  return idx;
}

double to_double(const std::string& s, const std::string& ctx) {
  try {
    return std::stod(s);
  } catch (...) {
    throw DataError("bad numeric value '" + s + "' in " + ctx);
  }
}

VehicleClass class_from_string(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  if (s == "car") return VehicleClass::Car;
  if (s == "truck" || s == "truck_bus" || s == "van" || s == "bus")
    return VehicleClass::Truck;
  return VehicleClass::Other;
}

bool is_vru_class(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), ::tolower);
  return s == "pedestrian" || s == "bicycle" || s == "motorcycle";
}

}  // namespace

RecordingParser::RecordingParser(const std::string& tracks_csv,
                                 const std::string& tracks_meta_csv,
                                 const std::string& recording_meta_csv,
                                 ParseOptions opts)
    : opts_(opts), tracks_path_(tracks_csv) {
  parse_recording_meta(recording_meta_csv);
  parse_tracks_meta(tracks_meta_csv);
  tracks_in_.open(tracks_csv);
  if (!tracks_in_) throw ParseError("cannot open tracks file: " + tracks_csv);
  std::string line;
  if (!read_line(tracks_in_, line)) {
    throw ParseError("empty tracks file: " + tracks_csv);
  }
  detect_layout(split_csv(line));
}

void RecordingParser::parse_recording_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open recordingMeta file: " + path);
  std::string line;
  if (!read_line(in, line)) throw ParseError("empty recordingMeta file: " + path);
  auto idx = index_header(split_csv(line));
  if (!read_line(in, line)) throw ParseError("recordingMeta has no data row: " + path);
  auto row = split_csv(line);
  auto get = [&](const char* name) -> std::optional<std::string> {
    auto it = idx.find(name);
    if (it == idx.end() || it->second >= static_cast<int>(row.size()))
      return std::nullopt;
    return row[it->second];
  };
  if (auto v = get("id")) meta_.recording_id = *v;
  else if (auto v2 = get("recordingId")) meta_.recording_id = *v2;
  else throw ParseError("recordingMeta missing id/recordingId column: " + path);
  if (auto v = get("locationId"))
    meta_.location_id = static_cast<int>(to_double(*v, path));
  if (auto v = get("frameRate")) meta_.fps = to_double(*v, path);
  if (meta_.fps <= 0.0) throw ValidationError("frame rate must be positive: " + path);
  // InD expresses positions relative to a UTM origin; HighD has no origin
  // columns and uses (0, 0).
  if (auto v = get("xUtmOrigin")) meta_.orig_origin.x = to_double(*v, path);
  if (auto v = get("yUtmOrigin")) meta_.orig_origin.y = to_double(*v, path);
}

void RecordingParser::parse_tracks_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open tracksMeta file: " + path);
  std::string line;
  if (!read_line(in, line)) throw ParseError("empty tracksMeta file: " + path);
  auto idx = index_header(split_csv(line));
  bool highd = idx.count("id") && idx.count("height");
  bool ind = idx.count("trackId") && idx.count("length");
  if (!highd && !ind) {
    throw ParseError("unknown tracksMeta header layout: " + path);
  }
  const int id_col = highd ? idx["id"] : idx["trackId"];
  const int class_col = idx.count("class") ? idx["class"] : -1;
  // HighD meta uses width=longitudinal extent, height=lateral extent.
  const int len_col = highd ? idx["width"] : idx["length"];
  const int wid_col = highd ? idx["height"] : idx["width"];
  while (read_line(in, line)) {
    auto row = split_csv(line);
    TrackMetaRow m;
    if (class_col >= 0 && class_col < static_cast<int>(row.size())) {
      m.is_vru = is_vru_class(row[class_col]);
      m.cls = class_from_string(row[class_col]);
    }
    m.length = to_double(row[len_col], path);
    m.width = to_double(row[wid_col], path);
    track_meta_[row[id_col]] = m;
  }
}

void RecordingParser::detect_layout(const std::vector<std::string>& header) {
  col_ = index_header(header);
  if (col_.count("id") && col_.count("x") && col_.count("y")) {
    meta_.layout = DatasetLayout::HighD;
  } else if (col_.count("trackId") && col_.count("xCenter") && col_.count("yCenter")) {
    meta_.layout = DatasetLayout::InD;
  } else {
    throw ParseError("unknown tracks header layout: " + tracks_path_);
  }
  for (const char* req : {"frame", "xVelocity", "yVelocity", "xAcceleration",
                          "yAcceleration"}) {
    if (!col_.count(req)) {
      throw ParseError(std::string("tracks file missing required column '") +
                       req + "': " + tracks_path_);
    }
  }
}

FrameSample RecordingParser::row_to_sample(const std::vector<std::string>& row) {
  auto f = [&](const char* name) {
    int c = col_.at(name);
    if (c >= static_cast<int>(row.size())) {
      throw DataError("short row at " + tracks_path_ + ":" + std::to_string(line_no_));
    }
    return to_double(row[c], tracks_path_ + ":" + std::to_string(line_no_));
  };
  FrameSample s;
  s.frame = static_cast<int>(f("frame"));
  Point p;
  if (meta_.layout == DatasetLayout::HighD) {
    // HighD x/y is the bounding-box corner; shift to the box center.
    p = {f("x") + f("width") / 2.0, f("y") + f("height") / 2.0};
  } else {
    p = {f("xCenter"), f("yCenter")};
  }
  Point net = transform_coords(p, meta_.orig_origin, opts_.net_origin);
  s.x = net.x;
  s.y = net.y;
  s.vx = f("xVelocity");
  s.vy = f("yVelocity");
  s.ax = f("xAcceleration");
  s.ay = f("yAcceleration");
  s.speed = std::hypot(s.vx, s.vy);
  if (meta_.layout == DatasetLayout::InD && col_.count("heading")) {
    s.heading = normalize_heading(f("heading"));
  } else if (s.speed > 1e-6) {
    s.heading = normalize_heading(std::atan2(s.vy, s.vx) * 180.0 / M_PI);
  } else {
    s.heading = 0.0;  // patched to previous heading in finish_track
  }
  s.t = s.frame / meta_.fps;
  return s;
}

VehicleTrack RecordingParser::finish_track(std::string id,
                                           std::vector<FrameSample> frames) {
  VehicleTrack t;
  t.id = std::move(id);
  t.frames = std::move(frames);
  auto it = track_meta_.find(t.id);
  if (it != track_meta_.end()) {
    t.cls = it->second.cls;
    t.length = it->second.length;
    t.width = it->second.width;
  }
  // Carry heading forward through standstill stretches.
  for (std::size_t i = 1; i < t.frames.size(); ++i) {
    if (t.frames[i].speed <= 1e-6) t.frames[i].heading = t.frames[i - 1].heading;
  }
  t.parked = track_displacement(t) < opts_.parked_displacement_m;
  if (t.parked) ++stats_.parked_count;
  ++stats_.tracks_emitted;
  return t;
}

std::optional<VehicleTrack> RecordingParser::next() {
  const int id_col =
      meta_.layout == DatasetLayout::HighD ? col_.at("id") : col_.at("trackId");
  std::string line;
  std::string cur_id;
  std::vector<FrameSample> frames;
  auto take_row = [&](const std::vector<std::string>& row) {
    FrameSample s = row_to_sample(row);
    if (!frames.empty() && s.frame <= frames.back().frame) {
      throw DataError("non-monotonic frames for vehicle " + cur_id + " in " +
                      tracks_path_);
    }
    frames.push_back(s);
  };

  while (true) {
    std::vector<std::string> row;
    if (pending_row_) {
      row = std::move(*pending_row_);
      pending_row_.reset();
    } else {
      if (!read_line(tracks_in_, line)) break;
      ++line_no_;
      row = split_csv(line);
    }
    if (id_col >= static_cast<int>(row.size())) {
      throw DataError("short row at " + tracks_path_ + ":" + std::to_string(line_no_));
    }
    const std::string& rid = row[id_col];
    if (frames.empty()) {
      cur_id = rid;
      take_row(row);
    } else if (rid == cur_id) {
      take_row(row);
    } else {
      pending_row_ = std::move(row);
      break;
    }
  }

  if (frames.empty()) return std::nullopt;
  stats_.max_resident_tracks = std::max(stats_.max_resident_tracks, 1);
  auto it = track_meta_.find(cur_id);
  if (it != track_meta_.end() && it->second.is_vru) {
    ++stats_.vru_skipped;
    return next();  // parsed and dropped
  }
  return finish_track(std::move(cur_id), std::move(frames));
}

std::pair<RecordingMeta, std::vector<VehicleTrack>> parse_recording(
    const std::string& tracks_csv, const std::string& tracks_meta_csv,
    const std::string& recording_meta_csv, ParseOptions opts,
    ParseStats* stats_out) {
  RecordingParser parser(tracks_csv, tracks_meta_csv, recording_meta_csv, opts);
  std::vector<VehicleTrack> tracks;
  while (auto t = parser.next()) tracks.push_back(std::move(*t));
  if (stats_out) *stats_out = parser.stats();
  return {parser.meta(), std::move(tracks)};
}

std::vector<VehicleTrack> filter_active(std::vector<VehicleTrack> tracks,
                                        std::size_t* removed) {
  std::size_t before = tracks.size();
  std::erase_if(tracks, [](const VehicleTrack& t) { return t.parked; });
  if (removed) *removed = before - tracks.size();
  return tracks;
}

double track_displacement(const VehicleTrack& t) {
  if (t.frames.empty()) return 0.0;
  Point start{t.frames.front().x, t.frames.front().y};
  double max_d = 0.0;
  for (const FrameSample& s : t.frames) {
    max_d = std::max(max_d, distance(start, Point{s.x, s.y}));
  }
  return max_d;
}

}  // namespace v2x
