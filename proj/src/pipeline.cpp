#include "v2xsim/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "v2xsim/rng.hpp"
#include "v2xsim/road_network.hpp"
#include "v2xsim/route_reconstruct.hpp"
#include "v2xsim/scenario_io.hpp"
#include "v2xsim/trajectory.hpp"

namespace v2x {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json config_to_json(const RunConfig& c) {
  json j;
  j["out_dir"] = c.out_dir;
  j["seed"] = c.sim.seed;
  j["csma"] = to_string(c.sim.csma);
  j["d_max"] = c.d_max;
  j["grid_search"] = c.grid_search;
  j["jobs"] = c.jobs;
  j["parked_displacement_m"] = c.parked_displacement_m;
  j["cam"] = {{"t_gen_min_s", c.sim.cam.t_gen_min_s},
              {"t_gen_max_s", c.sim.cam.t_gen_max_s},
              {"d_pos_m", c.sim.cam.d_pos_m},
              {"d_speed_mps", c.sim.cam.d_speed_mps},
              {"d_heading_deg", c.sim.cam.d_heading_deg},
              {"cam_size_bytes", c.sim.cam.cam_size_bytes}};
  j["radio"] = {{"tx_power_dbm", c.sim.radio.tx_power_dbm},
                {"rx_sensitivity_dbm", c.sim.radio.rx_sensitivity_dbm},
                {"ed_threshold_dbm", c.sim.radio.ed_threshold_dbm},
                {"data_rate_bps", c.sim.radio.data_rate_bps},
                {"pathloss_exponent", c.sim.radio.pathloss_exponent},
                {"ref_loss_1m_db", c.sim.radio.ref_loss_1m_db},
                {"capture_sinr_db", c.sim.radio.capture_sinr_db},
                {"noise_floor_dbm", c.sim.radio.noise_floor_dbm},
                {"mac_overhead_bytes", c.sim.radio.mac_overhead_bytes}};
  json table = json::array();
  for (const auto& r : c.sim.dcc.table.rows) {
    table.push_back({{"state", to_string(r.id)},
                     {"cbr", r.cbr_threshold},
                     {"toff_s", r.toff_s}});
  }
  j["dcc"] = {{"table", table},
              {"window_s", c.sim.dcc.cbr_window_s},
              {"alpha", c.sim.dcc.cbr_alpha},
              {"rx_queue_depth", c.sim.dcc.rx_queue_depth},
              {"rx_service_s", c.sim.dcc.rx_service_s}};
  if (c.bin_edges) j["bins"] = *c.bin_edges;
  if (c.awareness_range_m) j["awareness_range_m"] = *c.awareness_range_m;
  if (c.network_path) j["network"] = *c.network_path;
  json recs = json::array();
  for (const auto& r : c.recordings) {
    recs.push_back({{"tracks", r.tracks},
                    {"tracks_meta", r.tracks_meta},
                    {"recording_meta", r.recording_meta}});
  }
  j["recordings"] = recs;
  return j;
}

std::string recording_dir_name(const RecordingMeta& meta) {
  return "rec_" + meta.recording_id;
}

void env_overrides(RunConfig& c) {
  if (const char* s = std::getenv("V2XSIM_SEED")) c.sim.seed = std::stoull(s);
  if (const char* s = std::getenv("V2XSIM_OUT")) c.out_dir = s;
  if (const char* s = std::getenv("V2XSIM_JOBS")) c.jobs = std::stoi(s);
  if (const char* s = std::getenv("V2XSIM_CSMA")) {
    c.sim.csma = csma_mode_from_string(s);
  }
}

struct RecordingDirInfo {
  fs::path dir;
  RecordingMeta meta;
};

std::vector<RecordingDirInfo> list_recording_dirs(const RunConfig& cfg) {
  std::vector<RecordingDirInfo> out;
  fs::path root(cfg.out_dir);
  if (!fs::exists(root)) {
    throw PipelineError(2, "output directory does not exist: " + cfg.out_dir +
                               " (run convert first)");
  }
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory()) continue;
    fs::path scn = e.path() / "scenario.jsonl";
    if (!fs::exists(scn)) continue;
    ScenarioReader reader(scn.string());
    out.push_back({e.path(), reader.meta()});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.dir < b.dir; });
  if (out.empty()) {
    throw PipelineError(2, "no scenario files under " + cfg.out_dir);
  }
  return out;
}

void run_pool(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  int k = std::min<std::size_t>(jobs, n);
  for (int w = 0; w < k; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError(2, "cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw PipelineError(2, "malformed config " + path + ": " + e.what());
  }
  RunConfig c;
  try {
    for (const auto& r : j.value("recordings", json::array())) {
      c.recordings.push_back(RecordingInput{r.at("tracks").get<std::string>(),
                                            r.at("tracks_meta").get<std::string>(),
                                            r.at("recording_meta").get<std::string>()});
    }
    if (j.contains("network") && !j["network"].is_null()) {
      c.network_path = j["network"].get<std::string>();
    }
    c.out_dir = j.value("out_dir", c.out_dir);
    c.d_max = j.value("d_max", c.d_max);
    c.grid_search = j.value("grid_search", c.grid_search);
    c.jobs = j.value("jobs", c.jobs);
    c.parked_displacement_m =
        j.value("parked_displacement_m", c.parked_displacement_m);
    c.sim.seed = j.value("seed", c.sim.seed);
    if (j.contains("csma")) {
      c.sim.csma = csma_mode_from_string(j["csma"].get<std::string>());
    }
    if (j.contains("cam")) {
      const json& cj = j["cam"];
      auto& cam = c.sim.cam;
      cam.t_gen_min_s = cj.value("t_gen_min_s", cam.t_gen_min_s);
      cam.t_gen_max_s = cj.value("t_gen_max_s", cam.t_gen_max_s);
      cam.d_pos_m = cj.value("d_pos_m", cam.d_pos_m);
      cam.d_speed_mps = cj.value("d_speed_mps", cam.d_speed_mps);
      cam.d_heading_deg = cj.value("d_heading_deg", cam.d_heading_deg);
      cam.cam_size_bytes = cj.value("cam_size_bytes", cam.cam_size_bytes);
    }
    if (j.contains("radio")) {
      const json& rj = j["radio"];
      auto& r = c.sim.radio;
      r.tx_power_dbm = rj.value("tx_power_dbm", r.tx_power_dbm);
      r.rx_sensitivity_dbm = rj.value("rx_sensitivity_dbm", r.rx_sensitivity_dbm);
      r.ed_threshold_dbm = rj.value("ed_threshold_dbm", r.ed_threshold_dbm);
      r.data_rate_bps = rj.value("data_rate_bps", r.data_rate_bps);
      r.pathloss_exponent = rj.value("pathloss_exponent", r.pathloss_exponent);
      r.ref_loss_1m_db = rj.value("ref_loss_1m_db", r.ref_loss_1m_db);
      r.capture_sinr_db = rj.value("capture_sinr_db", r.capture_sinr_db);
      r.noise_floor_dbm = rj.value("noise_floor_dbm", r.noise_floor_dbm);
      r.mac_overhead_bytes = rj.value("mac_overhead_bytes", r.mac_overhead_bytes);
    }
    if (j.contains("dcc")) {
      const json& dj = j["dcc"];
      auto& d = c.sim.dcc;
      d.cbr_window_s = dj.value("window_s", d.cbr_window_s);
      d.cbr_alpha = dj.value("alpha", d.cbr_alpha);
      d.rx_queue_depth = dj.value("rx_queue_depth", d.rx_queue_depth);
      d.rx_service_s = dj.value("rx_service_s", d.rx_service_s);
      if (dj.contains("table")) {
        d.table.rows.clear();
        for (const auto& row : dj["table"]) {
          d.table.rows.push_back(
              {dcc_state_from_string(row.at("state").get<std::string>()),
               row.at("cbr").get<double>(), row.at("toff_s").get<double>()});
        }
        d.table.validate();
      }
    }
    if (j.contains("bins")) c.bin_edges = j["bins"].get<std::vector<double>>();
    if (j.contains("awareness_range_m")) {
      c.awareness_range_m = j["awareness_range_m"].get<double>();
    }
  } catch (const json::exception& e) {
    throw PipelineError(2, "bad config value in " + path + ": " + e.what());
  }
  env_overrides(c);
  for (const auto& r : c.recordings) {
    for (const std::string& p : {r.tracks, r.tracks_meta, r.recording_meta}) {
      if (!fs::exists(p)) throw PipelineError(2, "input file missing: " + p);
    }
  }
  if (c.network_path && !fs::exists(*c.network_path)) {
    throw PipelineError(2, "network file missing: " + *c.network_path);
  }
  return c;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(config_to_json(*this).dump()); }

ConvertSummary cmd_convert(const RunConfig& cfg) {
  fs::create_directories(fs::path(cfg.out_dir));
  fs::create_directories(fs::path(cfg.out_dir) / "reports");
  std::uint64_t chash = cfg.hash();

  std::optional<RoadNetwork> net;
  if (cfg.network_path) net.emplace(RoadNetwork::load(*cfg.network_path));

  ConvertSummary summary;
  for (const RecordingInput& rec : cfg.recordings) {
    ParseOptions opts;
    opts.parked_displacement_m = cfg.parked_displacement_m;
    if (net) opts.net_origin = net->origin();
    RecordingParser parser(rec.tracks, rec.tracks_meta, rec.recording_meta, opts);

    fs::path dir = fs::path(cfg.out_dir) / recording_dir_name(parser.meta());
    fs::create_directories(dir);
    ScenarioWriter writer((dir / "scenario.jsonl").string(), parser.meta(), chash,
                          cfg.sim.seed);

    std::ofstream detail((dir / "conversion_detail.csv").string());
    detail << provenance_header(chash, cfg.sim.seed) << "\n";
    detail << "vehicle,t_replayed_s,t_original_s\n";

    std::ofstream routes;
    if (net) {
      routes.open((dir / "routes.csv").string());
      routes << provenance_header(chash, cfg.sim.seed) << "\n";
      routes << "vehicle,nodes,skipped_frames,interpolated_segments,empty\n";
    }

    double fps = parser.meta().fps;
    double dt_sum = 0.0;
    std::size_t converted = 0;
    std::vector<VehicleTrack> qa_sample;  // bounded sample for grid search
    while (auto track = parser.next()) {
      writer.write_track(*track);
      double t_orig = track->running_time(fps);
      double t_replay = t_orig;  // trace-driven playback, equal by construction
      detail << track->id << "," << t_replay << "," << t_orig << "\n";
      dt_sum += t_replay - t_orig;
      ++converted;
      if (net) {
        RouteAssociation a = associate_route(*track, *net, cfg.d_max);
        routes << track->id << "," << a.route.size() << "," << a.skipped_frames
               << "," << a.interpolated_segments << "," << (a.empty() ? 1 : 0)
               << "\n";
        if (cfg.grid_search && qa_sample.size() < 200) {
          qa_sample.push_back(std::move(*track));
        }
      }
    }

    if (net && cfg.grid_search && !qa_sample.empty()) {
      GridSearchResult g = grid_search_dmax(qa_sample, *net);
      std::ofstream table((dir / "dmax_table.csv").string());
      table << provenance_header(chash, cfg.sim.seed) << "\n";
      table << "d_max,coverage,mean_dist\n";
      for (const auto& row : g.table) {
        table << row.d_max << "," << row.coverage << "," << row.mean_dist << "\n";
      }
      table << "# selected=" << g.selected << "\n";
    }

    ConvertSummary::Row row;
    row.recording_id = parser.meta().recording_id;
    row.location_id = parser.meta().location_id;
    row.vehicles_orig = converted;  // loss-free: every parsed vehicle is written
    row.vehicles_converted = converted;
    row.parked = parser.stats().parked_count;
    row.vru_skipped = parser.stats().vru_skipped;
    row.delta_t_s = converted > 0 ? dt_sum / converted : 0.0;
    summary.rows.push_back(row);
  }

  std::ofstream rep((fs::path(cfg.out_dir) / "reports" / "conversion.csv").string());
  rep << provenance_header(chash, cfg.sim.seed) << "\n";
  rep << "recording,location,vehicles_orig,vehicles_converted,parked,vru_skipped,"
         "delta_t_s\n";
  for (const auto& r : summary.rows) {
    rep << r.recording_id << "," << r.location_id << "," << r.vehicles_orig << ","
        << r.vehicles_converted << "," << r.parked << "," << r.vru_skipped << ","
        << r.delta_t_s << "\n";
  }
  return summary;
}

int cmd_simulate(const RunConfig& cfg) {
  auto dirs = list_recording_dirs(cfg);
  std::uint64_t chash = cfg.hash();
  std::atomic<int> failures{0};
  std::mutex log_mu;

  run_pool(cfg.jobs, dirs.size(), [&](std::size_t i) {
    const auto& info = dirs[i];
    try {
      Scenario sc = load_scenario((info.dir / "scenario.jsonl").string());
      CamLogWriter cams((info.dir / "cams.csv").string(), chash, cfg.sim.seed);
      ReceptionLogWriter rx((info.dir / "receptions.csv").string(), chash,
                            cfg.sim.seed);
      CbrLogWriter cbr((info.dir / "cbr.csv").string(), chash, cfg.sim.seed);
      SimSinks sinks;
      sinks.cam = [&](const CamRecord& r) { cams.write(r); };
      sinks.reception = [&](const ReceptionRecord& r) { rx.write(r); };
      sinks.cbr = [&](const CbrRecord& r) { cbr.write(r); };
      Simulator sim(sc, cfg.sim, sinks);
      SimResult res = sim.run();

      std::ofstream sup((info.dir / "suppression.csv").string());
      sup << provenance_header(chash, cfg.sim.seed) << "\n";
      sup << "location,tx_attempts,tx_suppressed,rx_offered,rx_suppressed,"
             "mean_tx_suppression,mean_rx_suppression\n";
      sup << sc.meta.location_id << "," << res.suppression.tx_attempts << ","
          << res.suppression.tx_suppressed << "," << res.suppression.rx_offered
          << "," << res.suppression.rx_suppressed << ","
          << res.suppression.tx_ratio() << "," << res.suppression.rx_ratio()
          << "\n";
    } catch (const std::exception& e) {
      std::scoped_lock lk(log_mu);
      std::cerr << "scenario " << info.dir << " failed: " << e.what() << "\n";
      ++failures;
    }
  });
  return failures.load();
}

std::vector<KpiReport> cmd_analyze(const RunConfig& cfg) {
  auto dirs = list_recording_dirs(cfg);
  std::uint64_t chash = cfg.hash();
  double awareness = cfg.awareness_range_m.value_or(delivery_range_m(cfg.sim.radio));

  // Group recordings per location.
  std::map<int, std::vector<const RecordingDirInfo*>> by_location;
  for (const auto& d : dirs) by_location[d.meta.location_id].push_back(&d);

  fs::path reports = fs::path(cfg.out_dir) / "reports";
  fs::create_directories(reports);

  std::vector<KpiReport> out;
  for (const auto& [loc, recs] : by_location) {
    std::vector<CamRecord> cams;
    std::vector<ReceptionRecord> rx;
    std::vector<CbrRecord> cbr;
    SuppressionCounters sup;
    DistanceBins bins = recs.front()->meta.layout == DatasetLayout::HighD
                            ? DistanceBins::highway_default()
                            : DistanceBins::urban_default();
    if (cfg.bin_edges) bins.edges = *cfg.bin_edges;

    std::ofstream series((reports / ("cbr_series_loc" + std::to_string(loc) + ".csv"))
                             .string());
    series << provenance_header(chash, cfg.sim.seed) << "\n";
    series << "track,t_s,vehicles,cbr\n";

    for (const RecordingDirInfo* rec : recs) {
      fs::path cam_p = rec->dir / "cams.csv";
      if (!fs::exists(cam_p)) {
        throw PipelineError(2, "missing logs under " + rec->dir.string() +
                                   " (run simulate first)");
      }
      auto c = read_cam_log(cam_p.string());
      auto r = read_reception_log((rec->dir / "receptions.csv").string());
      auto b = read_cbr_log((rec->dir / "cbr.csv").string());
      CbrStats per_track = cbr_stats(b);
      for (const auto& p : per_track.series) {
        series << rec->meta.recording_id << "," << p.t_s << "," << p.vehicles << ","
               << p.cbr << "\n";
      }
      cams.insert(cams.end(), c.begin(), c.end());
      rx.insert(rx.end(), r.begin(), r.end());
      cbr.insert(cbr.end(), b.begin(), b.end());

      std::ifstream sup_in((rec->dir / "suppression.csv").string());
      read_provenance_header(sup_in, "suppression.csv");
      std::string line;
      std::getline(sup_in, line);  // header
      if (std::getline(sup_in, line)) {
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        SuppressionCounters s;
        s.tx_attempts = std::stoull(f.at(1));
        s.tx_suppressed = std::stoull(f.at(2));
        s.rx_offered = std::stoull(f.at(3));
        s.rx_suppressed = std::stoull(f.at(4));
        sup += s;
      }
    }

    std::stable_sort(cams.begin(), cams.end(),
                     [](const CamRecord& a, const CamRecord& b) { return a.t < b.t; });
    std::stable_sort(rx.begin(), rx.end(), [](const ReceptionRecord& a,
                                              const ReceptionRecord& b) {
      return a.t_rx < b.t_rx;
    });

    KpiReport rep = compute_kpi_report(loc, cams, rx, cbr, sup, bins, awareness);
    out.push_back(rep);

    std::ofstream js((reports / ("location_" + std::to_string(loc) + ".json")).string());
    js << provenance_header(chash, cfg.sim.seed) << "\n" << kpi_report_to_json(rep);
    std::ofstream cs((reports / ("location_" + std::to_string(loc) + ".csv")).string());
    cs << provenance_header(chash, cfg.sim.seed) << "\n" << kpi_report_to_csv(rep);
  }
  return out;
}

void cmd_report(const RunConfig& cfg) {
  auto dirs = list_recording_dirs(cfg);
  fs::path reports = fs::path(cfg.out_dir) / "reports";
  std::map<int, DatasetLayout> loc_layout;
  for (const auto& d : dirs) loc_layout[d.meta.location_id] = d.meta.layout;

  std::map<std::string, std::vector<json>> families;
  for (const auto& [loc, layout] : loc_layout) {
    fs::path p = reports / ("location_" + std::to_string(loc) + ".json");
    if (!fs::exists(p)) {
      throw PipelineError(2, "missing analysis report " + p.string() +
                                 " (run analyze first)");
    }
    std::ifstream in(p.string());
    read_provenance_header(in, p.string());
    json j;
    in >> j;
    families[layout == DatasetLayout::HighD ? "highway" : "urban"].push_back(j);
  }

  std::ofstream out((reports / "summary.csv").string());
  out << provenance_header(cfg.hash(), cfg.sim.seed) << "\n";
  out << "family,location,mean_igg_s,mean_ipg_s,pdr,mean_cbr,tx_suppression,"
         "rx_suppression\n";
  for (const auto& [family, rows] : families) {
    for (const json& j : rows) {
      out << family << "," << j["location"] << "," << j["mean_igg_s"] << ","
          << j["mean_ipg_s"] << ",";
      if (j["pdr"].is_null()) out << "undefined";
      else out << j["pdr"].get<double>();
      out << "," << j["mean_cbr"] << "," << j["tx_suppression"] << ","
          << j["rx_suppression"] << "\n";
    }
  }
}

}  // namespace v2x
