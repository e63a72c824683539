#include "v2xsim/scenario_io.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "v2xsim/common.hpp"

namespace v2x {

namespace {

using nlohmann::json;

const char* layout_name(DatasetLayout l) {
  return l == DatasetLayout::HighD ? "highd" : "ind";
}

DatasetLayout layout_from_name(const std::string& s) {
  if (s == "highd") return DatasetLayout::HighD;
  if (s == "ind") return DatasetLayout::InD;
  throw ParseError("unknown dataset layout: " + s);
}

const char* class_name(VehicleClass c) {
  switch (c) {
    case VehicleClass::Car: return "Car";
    case VehicleClass::Truck: return "Truck";
    case VehicleClass::Other: return "Other";
  }
  return "?";
}

VehicleClass class_from_name(const std::string& s) {
  if (s == "Car") return VehicleClass::Car;
  if (s == "Truck") return VehicleClass::Truck;
  return VehicleClass::Other;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string provenance_header(std::uint64_t config_hash, std::uint64_t seed) {
  std::ostringstream s;
  s << "# v2xsim " << kToolVersion << " config_hash=" << std::hex << config_hash
    << std::dec << " seed=" << seed;
  return s.str();
}

std::string read_provenance_header(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# v2xsim", 0) != 0) {
    throw ParseError("missing provenance header in " + path);
  }
  return line;
}

ScenarioWriter::ScenarioWriter(const std::string& path, const RecordingMeta& meta,
                               std::uint64_t config_hash, std::uint64_t seed)
    : path_(path) {
  out_.open(path);
  if (!out_) throw ParseError("cannot write scenario file: " + path);
  out_ << provenance_header(config_hash, seed) << "\n";
  json j;
  j["type"] = "meta";
  j["recording_id"] = meta.recording_id;
  j["location_id"] = meta.location_id;
  j["fps"] = meta.fps;
  j["orig_origin"] = {meta.orig_origin.x, meta.orig_origin.y};
  j["layout"] = layout_name(meta.layout);
  out_ << j.dump() << "\n";
}

void ScenarioWriter::write_track(const VehicleTrack& track) {
  json j;
  j["type"] = "track";
  j["id"] = track.id;
  j["class"] = class_name(track.cls);
  j["length"] = track.length;
  j["width"] = track.width;
  j["parked"] = track.parked;
  json frames = json::array();
  for (const FrameSample& s : track.frames) {
    frames.push_back({s.frame, s.x, s.y, s.vx, s.vy, s.ax, s.ay, s.heading});
  }
  j["frames"] = std::move(frames);
  out_ << j.dump() << "\n";
}

ScenarioReader::ScenarioReader(const std::string& path) : path_(path) {
  in_.open(path);
  if (!in_) throw ParseError("cannot open scenario file: " + path);
  read_provenance_header(in_, path);
  std::string line;
  if (!std::getline(in_, line)) throw ParseError("scenario file has no meta: " + path);
  json j = json::parse(line);
  if (j.value("type", "") != "meta") {
    throw ParseError("scenario file must start with a meta record: " + path);
  }
  meta_.recording_id = j.at("recording_id").get<std::string>();
  meta_.location_id = j.at("location_id").get<int>();
  meta_.fps = j.at("fps").get<double>();
  meta_.orig_origin = {j.at("orig_origin").at(0).get<double>(),
                       j.at("orig_origin").at(1).get<double>()};
  meta_.layout = layout_from_name(j.at("layout").get<std::string>());
}

std::optional<VehicleTrack> ScenarioReader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  if (line.empty()) return next();
  json j = json::parse(line);
  if (j.value("type", "") != "track") {
    throw ParseError("unexpected record in scenario file " + path_);
  }
  VehicleTrack t;
  t.id = j.at("id").get<std::string>();
  t.cls = class_from_name(j.at("class").get<std::string>());
  t.length = j.at("length").get<double>();
  t.width = j.at("width").get<double>();
  t.parked = j.at("parked").get<bool>();
  for (const auto& f : j.at("frames")) {
    FrameSample s;
    s.frame = f.at(0).get<int>();
    s.t = s.frame / meta_.fps;
    s.x = f.at(1).get<double>();
    s.y = f.at(2).get<double>();
    s.vx = f.at(3).get<double>();
    s.vy = f.at(4).get<double>();
    s.ax = f.at(5).get<double>();
    s.ay = f.at(6).get<double>();
    s.heading = f.at(7).get<double>();
    s.speed = std::hypot(s.vx, s.vy);
    t.frames.push_back(s);
  }
  return t;
}

Scenario load_scenario(const std::string& path, bool drop_parked,
                       std::size_t* parked_removed) {
  ScenarioReader reader(path);
  Scenario sc;
  sc.meta = reader.meta();
  std::size_t removed = 0;
  while (auto t = reader.next()) {
    if (drop_parked && t->parked) {
      ++removed;
      continue;
    }
    sc.tracks.push_back(std::move(*t));
  }
  if (parked_removed) *parked_removed = removed;
  return sc;
}

CamLogWriter::CamLogWriter(const std::string& path, std::uint64_t config_hash,
                           std::uint64_t seed) {
  out_.open(path);
  if (!out_) throw ParseError("cannot write CAM log: " + path);
  out_ << provenance_header(config_hash, seed) << "\n";
  out_ << "sender,seq,t,x,y,speed,heading,size,cause\n";
  out_ << std::setprecision(12);
}

void CamLogWriter::write(const CamRecord& r) {
  out_ << r.sender << "," << r.seq << "," << us_to_seconds(r.t) << "," << r.x << ","
       << r.y << "," << r.speed << "," << r.heading << "," << r.size_bytes << ","
       << to_string(r.cause) << "\n";
}

ReceptionLogWriter::ReceptionLogWriter(const std::string& path,
                                       std::uint64_t config_hash,
                                       std::uint64_t seed) {
  out_.open(path);
  if (!out_) throw ParseError("cannot write reception log: " + path);
  out_ << provenance_header(config_hash, seed) << "\n";
  out_ << "receiver,sender,seq,t_rx,verdict,rx_dbm,distance_m\n";
  out_ << std::setprecision(12);
}

void ReceptionLogWriter::write(const ReceptionRecord& r) {
  out_ << r.receiver << "," << r.sender << "," << r.seq << ","
       << us_to_seconds(r.t_rx) << "," << to_string(r.verdict) << "," << r.rx_dbm
       << "," << r.distance_m << "\n";
}

CbrLogWriter::CbrLogWriter(const std::string& path, std::uint64_t config_hash,
                           std::uint64_t seed) {
  out_.open(path);
  if (!out_) throw ParseError("cannot write CBR log: " + path);
  out_ << provenance_header(config_hash, seed) << "\n";
  out_ << "t_s,vehicle,cbr,active_vehicles\n";
  out_ << std::setprecision(12);
}

void CbrLogWriter::write(const CbrRecord& r) {
  out_ << us_to_seconds(r.t) << "," << r.vehicle << "," << r.cbr << ","
       << r.active_vehicles << "\n";
}

std::vector<CamRecord> read_cam_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CAM log: " + path);
  read_provenance_header(in, path);
  std::string line;
  std::getline(in, line);  // column header
  std::vector<CamRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 9) throw ParseError("bad CAM log row in " + path + ": " + line);
    CamRecord r;
    r.sender = f[0];
    r.seq = static_cast<std::uint32_t>(std::stoul(f[1]));
    r.t = seconds_to_us(std::stod(f[2]));
    r.x = std::stod(f[3]);
    r.y = std::stod(f[4]);
    r.speed = std::stod(f[5]);
    r.heading = std::stod(f[6]);
    r.size_bytes = std::stoi(f[7]);
    r.cause = cam_cause_from_string(f[8]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ReceptionRecord> read_reception_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open reception log: " + path);
  read_provenance_header(in, path);
  std::string line;
  std::getline(in, line);
  std::vector<ReceptionRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 7) {
      throw ParseError("bad reception log row in " + path + ": " + line);
    }
    ReceptionRecord r;
    r.receiver = f[0];
    r.sender = f[1];
    r.seq = static_cast<std::uint32_t>(std::stoul(f[2]));
    r.t_rx = seconds_to_us(std::stod(f[3]));
    r.verdict = rx_verdict_from_string(f[4]);
    r.rx_dbm = std::stod(f[5]);
    r.distance_m = std::stod(f[6]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CbrRecord> read_cbr_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CBR log: " + path);
  read_provenance_header(in, path);
  std::string line;
  std::getline(in, line);
  std::vector<CbrRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 4) throw ParseError("bad CBR log row in " + path + ": " + line);
    CbrRecord r;
    r.t = seconds_to_us(std::stod(f[0]));
    r.vehicle = f[1];
    r.cbr = std::stod(f[2]);
    r.active_vehicles = std::stoi(f[3]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace v2x
