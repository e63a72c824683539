#include <doctest.h>

#include <random>
#include <sstream>

#include "test_util.hpp"
#include "v2xsim/sim_core.hpp"

using namespace v2x;
using namespace v2x::testutil;

namespace {

struct LogCapture {
  std::vector<CamRecord> cams;
  std::vector<ReceptionRecord> rx;
  std::vector<CbrRecord> cbr;

  SimSinks sinks() {
    SimSinks s;
    s.cam = [this](const CamRecord& r) { cams.push_back(r); };
    s.reception = [this](const ReceptionRecord& r) { rx.push_back(r); };
    s.cbr = [this](const CbrRecord& r) { cbr.push_back(r); };
    return s;
  }

  // Canonical text form for byte-level determinism comparisons.
  std::string dump() const {
    std::ostringstream o;
    o.precision(17);
    for (const auto& r : cams) {
      o << "C " << r.sender << ' ' << r.seq << ' ' << r.t << ' ' << r.x << ' '
        << r.y << ' ' << r.speed << ' ' << r.heading << ' ' << r.size_bytes
        << ' ' << to_string(r.cause) << '\n';
    }
    for (const auto& r : rx) {
      o << "R " << r.receiver << ' ' << r.sender << ' ' << r.seq << ' ' << r.t_rx
        << ' ' << to_string(r.verdict) << ' ' << r.rx_dbm << ' ' << r.distance_m
        << '\n';
    }
    for (const auto& r : cbr) {
      o << "B " << r.t << ' ' << r.vehicle << ' ' << r.cbr << ' '
        << r.active_vehicles << '\n';
    }
    return o.str();
  }
};

Scenario make_scenario(std::vector<VehicleTrack> tracks) {
  Scenario s;
  s.meta.fps = 25.0;
  s.meta.location_id = 1;
  s.tracks = std::move(tracks);
  return s;
}

SimConfig base_config(CsmaMode mode) {
  SimConfig cfg;
  cfg.csma = mode;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("vehicle grid: query equals brute force") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> coord(-400.0, 400.0);
  std::vector<Point> pts;
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < 300; ++i) {
    pts.push_back({coord(rng), coord(rng)});
    ids.push_back(i);
  }
  VehicleGrid grid;
  grid.build(pts, ids, 75.0);
  std::vector<std::uint32_t> got;
  for (int q = 0; q < 200; ++q) {
    Point p{coord(rng), coord(rng)};
    double radius = 30.0 + (q % 7) * 40.0;
    grid.query(p, radius, got);
    std::vector<std::uint32_t> want;
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
      if (distance(pts[i], p) <= radius) want.push_back(i);
    }
    std::sort(got.begin(), got.end());
    REQUIRE(got == want);
  }
}

TEST_CASE("single vehicle: CAMs but no receptions") {
  Scenario sc = make_scenario({stationary_track("a", {0, 0}, 0, 251)});
  LogCapture log;
  SimResult res = Simulator(sc, base_config(CsmaMode::Ideal), log.sinks()).run();
  CHECK(res.cam_count == 10);
  CHECK(log.cams.size() == 10);
  CHECK(log.rx.empty());
  CHECK(res.reception_count == 0);
  CHECK(res.replayed_times.at("a") == doctest::Approx(10.0));
}

TEST_CASE("staggered pair at 100 m: every frame delivered both ways") {
  Scenario sc = make_scenario({stationary_track("a", {0, 0}, 0, 251),
                               stationary_track("b", {100, 0}, 5, 256)});
  LogCapture log;
  SimResult res = Simulator(sc, base_config(CsmaMode::Ideal), log.sinks()).run();
  CHECK(res.cam_count == 20);
  // b's final CAM at 10.2 s lands after a has retired, so 19 receptions.
  REQUIRE(res.reception_count == 19);
  for (const auto& r : log.rx) {
    CHECK(r.verdict == RxVerdict::Delivered);
    CHECK(r.distance_m == doctest::Approx(100.0));
  }
  CHECK(res.delivered_count == 19);
  CHECK(res.suppression.tx_suppressed == 0);
  CHECK(res.suppression.rx_suppressed == 0);
}

TEST_CASE("pair beyond the delivery range: everything BelowSensitivity") {
  Scenario sc = make_scenario({stationary_track("a", {0, 0}, 0, 126),
                               stationary_track("b", {790, 0}, 5, 131)});
  LogCapture log;
  SimResult res = Simulator(sc, base_config(CsmaMode::Ideal), log.sinks()).run();
  CHECK(res.delivered_count == 0);
  CHECK(!log.rx.empty());
  for (const auto& r : log.rx) CHECK(r.verdict == RxVerdict::BelowSensitivity);
}

TEST_CASE("synchronized senders: ideal mode collides, CSMA serializes") {
  auto tracks = [] {
    return std::vector<VehicleTrack>{stationary_track("a", {0, 0}, 0, 126),
                                     stationary_track("b", {100, 0}, 0, 126)};
  };
  SUBCASE("ideal: half-duplex kills the simultaneous frames") {
    Scenario sc = make_scenario(tracks());
    LogCapture log;
    SimResult res = Simulator(sc, base_config(CsmaMode::Ideal), log.sinks()).run();
    CHECK(res.delivered_count == 0);
    for (const auto& r : log.rx) CHECK(r.verdict == RxVerdict::Collided);
  }
  SUBCASE("csma: contention resolves and every frame is delivered") {
    Scenario sc = make_scenario(tracks());
    LogCapture log;
    SimResult res = Simulator(sc, base_config(CsmaMode::Csma), log.sinks()).run();
    CHECK(res.delivered_count == res.reception_count);
    CHECK(res.delivered_count == 10);
    for (const auto& r : log.rx) CHECK(r.verdict == RxVerdict::Delivered);
  }
}

TEST_CASE("moving fleet is deterministic: identical runs, byte for byte") {
  std::vector<VehicleTrack> tracks;
  for (int v = 0; v < 12; ++v) {
    tracks.push_back(straight_track("v" + std::to_string(v), 20.0 + v, v * 3, 200,
                                    v * 4.0));
  }
  auto run_once = [&] {
    Scenario sc = make_scenario(tracks);
    LogCapture log;
    Simulator(sc, base_config(CsmaMode::Csma), log.sinks()).run();
    return log.dump();
  };
  std::string first = run_once();
  CHECK(!first.empty());
  CHECK(run_once() == first);
}

TEST_CASE("seed is inert under the ideal channel") {
  std::vector<VehicleTrack> tracks;
  for (int v = 0; v < 8; ++v) {
    tracks.push_back(straight_track("v" + std::to_string(v), 15.0, v * 2, 150,
                                    v * 5.0));
  }
  auto run_seed = [&](std::uint64_t seed) {
    Scenario sc = make_scenario(tracks);
    SimConfig cfg = base_config(CsmaMode::Ideal);
    cfg.seed = seed;
    LogCapture log;
    Simulator(sc, cfg, log.sinks()).run();
    return log.dump();
  };
  CHECK(run_seed(1) == run_seed(999));
}

TEST_CASE("seed reshuffles CSMA backoffs but not CAM generation") {
  std::vector<VehicleTrack> tracks{stationary_track("a", {0, 0}, 0, 126),
                                   stationary_track("b", {60, 0}, 0, 126)};
  auto cams_for = [&](std::uint64_t seed) {
    Scenario sc = make_scenario(tracks);
    SimConfig cfg = base_config(CsmaMode::Csma);
    cfg.seed = seed;
    LogCapture log;
    Simulator(sc, cfg, log.sinks()).run();
    return log.cams;
  };
  auto a = cams_for(1), b = cams_for(77);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sender == b[i].sender);
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].seq == b[i].seq);
  }
}

TEST_CASE("vehicle insertion order does not change per-vehicle outcomes") {
  std::vector<VehicleTrack> fwd{stationary_track("a", {0, 0}, 0, 126),
                                stationary_track("b", {100, 0}, 3, 129),
                                stationary_track("c", {200, 0}, 6, 132)};
  std::vector<VehicleTrack> rev{fwd[2], fwd[1], fwd[0]};
  auto run_order = [](std::vector<VehicleTrack> tracks) {
    Scenario sc = make_scenario(std::move(tracks));
    LogCapture log;
    Simulator(sc, base_config(CsmaMode::Csma), log.sinks()).run();
    std::sort(log.rx.begin(), log.rx.end(), [](const auto& x, const auto& y) {
      return std::tie(x.t_rx, x.receiver, x.sender) <
             std::tie(y.t_rx, y.receiver, y.sender);
    });
    return log;
  };
  LogCapture f = run_order(fwd), r = run_order(rev);
  REQUIRE(f.rx.size() == r.rx.size());
  for (std::size_t i = 0; i < f.rx.size(); ++i) {
    CHECK(f.rx[i].receiver == r.rx[i].receiver);
    CHECK(f.rx[i].sender == r.rx[i].sender);
    CHECK(f.rx[i].t_rx == r.rx[i].t_rx);
    CHECK(f.rx[i].verdict == r.rx[i].verdict);
  }
}

TEST_CASE("activation window: receptions only while both tracks run") {
  // b exists only for the middle two seconds of a's ten.
  Scenario sc = make_scenario({stationary_track("a", {0, 0}, 0, 251),
                               stationary_track("b", {100, 0}, 100, 51)});
  LogCapture log;
  Simulator(sc, base_config(CsmaMode::Ideal), log.sinks()).run();
  for (const auto& r : log.rx) {
    CHECK(r.t_rx >= 100 * kTickUs);
    CHECK(r.t_rx <= 151 * kTickUs + seconds_to_us(1e-3));
  }
  // a sends 10 CAMs, b sends 2.
  int from_a = 0, from_b = 0;
  for (const auto& c : log.cams) (c.sender == "a" ? from_a : from_b)++;
  CHECK(from_a == 10);
  CHECK(from_b == 2);
}

TEST_CASE("CBR log: quiet pair stays far below the first DCC threshold") {
  Scenario sc = make_scenario({stationary_track("a", {0, 0}, 0, 251),
                               stationary_track("b", {100, 0}, 5, 256)});
  LogCapture log;
  Simulator(sc, base_config(CsmaMode::Csma), log.sinks()).run();
  REQUIRE(!log.cbr.empty());
  double peak = 0.0;
  for (const auto& r : log.cbr) peak = std::max(peak, r.cbr);
  CHECK(peak > 0.0);   // own transmissions count as busy air
  CHECK(peak < 0.05);  // nowhere near the 0.30 Active1 threshold
  for (const auto& r : log.cbr) CHECK(r.active_vehicles <= 2);
}

TEST_CASE("empty scenario runs to a clean zero result") {
  Scenario sc = make_scenario({});
  LogCapture log;
  SimResult res = Simulator(sc, base_config(CsmaMode::Csma), log.sinks()).run();
  CHECK(res.cam_count == 0);
  CHECK(res.tx_count == 0);
  CHECK(log.cbr.empty());
}

TEST_CASE("track with no frames is rejected") {
  VehicleTrack empty;
  empty.id = "x";
  Scenario sc = make_scenario({empty});
  LogCapture log;
  Simulator sim(sc, base_config(CsmaMode::Csma), log.sinks());
  CHECK_THROWS_AS(sim.run(), ValidationError);
}
