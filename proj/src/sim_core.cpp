#include "v2xsim/sim_core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include "v2xsim/rng.hpp"

namespace v2x {

const char* to_string(CsmaMode m) {
  return m == CsmaMode::Ideal ? "ideal" : "csma";
}

CsmaMode csma_mode_from_string(const std::string& s) {
  if (s == "ideal") return CsmaMode::Ideal;
  if (s == "csma") return CsmaMode::Csma;
  throw ValidationError("unknown CSMA fidelity level: " + s);
}

void VehicleGrid::build(std::span<const Point> positions,
                        std::span<const std::uint32_t> ids, double cell_size) {
  cell_size_ = std::max(cell_size, 1.0);
  pos_.assign(positions.begin(), positions.end());
  id_of_.assign(ids.begin(), ids.end());
  for (auto& c : cells_) c.clear();
  if (pos_.empty()) {
    nx_ = ny_ = 0;
    return;
  }
  min_x_ = min_y_ = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  for (const Point& p : pos_) {
    min_x_ = std::min(min_x_, p.x);
    min_y_ = std::min(min_y_, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  nx_ = static_cast<int>((max_x - min_x_) / cell_size_) + 1;
  ny_ = static_cast<int>((max_y - min_y_) / cell_size_) + 1;
  cells_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (auto& c : cells_) c.clear();
  for (std::uint32_t i = 0; i < pos_.size(); ++i) {
    int cx = static_cast<int>((pos_[i].x - min_x_) / cell_size_);
    int cy = static_cast<int>((pos_[i].y - min_y_) / cell_size_);
    cells_[static_cast<std::size_t>(cy) * nx_ + cx].push_back(i);
  }
}

void VehicleGrid::query(Point p, double radius,
                        std::vector<std::uint32_t>& out) const {
  out.clear();
  if (nx_ == 0) return;
  int cx0 = static_cast<int>(std::floor((p.x - radius - min_x_) / cell_size_));
  int cx1 = static_cast<int>(std::floor((p.x + radius - min_x_) / cell_size_));
  int cy0 = static_cast<int>(std::floor((p.y - radius - min_y_) / cell_size_));
  int cy1 = static_cast<int>(std::floor((p.y + radius - min_y_) / cell_size_));
  cx0 = std::clamp(cx0, 0, nx_ - 1);
  cx1 = std::clamp(cx1, 0, nx_ - 1);
  cy0 = std::clamp(cy0, 0, ny_ - 1);
  cy1 = std::clamp(cy1, 0, ny_ - 1);
  for (int cy = cy0; cy <= cy1; ++cy) {
    for (int cx = cx0; cx <= cx1; ++cx) {
      for (std::uint32_t i : cells_[static_cast<std::size_t>(cy) * nx_ + cx]) {
        if (distance(pos_[i], p) <= radius) out.push_back(id_of_[i]);
      }
    }
  }
}

namespace {

enum EventKind : int { kWindow = 0, kTick = 1, kTxAttempt = 2, kTxEnd = 3 };

struct Event {
  TimeUs t;
  int kind;
  std::uint64_t ord;
  std::uint64_t payload;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.ord > b.ord;
  }
};

struct PendingTx {
  std::uint32_t vehicle = 0;
  std::uint32_t seq = 0;
  int payload_bytes = 0;
};

struct VehicleState {
  CamGenerator cam;
  DccGate gate;
  CbrMeter meter;
  RxQueue rx_queue;
  SuppressionCounters counters;
  SplitMix64 rng;
  Point pos;
  bool active = false;
  std::size_t cursor = 0;  // index into track frames
  // Carrier-sense busy accounting within the current CBR window.
  TimeUs busy_until = 0;
  TimeUs busy_accum = 0;
  // Own transmission span, for half-duplex checks.
  TimeUs tx_start = -1;
  TimeUs tx_end = -1;

  VehicleState(std::string id, const CamConfig& cam_cfg, const DccParams& dcc,
               std::uint64_t seed)
      : cam(id, cam_cfg),
        gate(dcc.table),
        meter{dcc.cbr_window_s, dcc.cbr_alpha, 0.0},
        rx_queue(dcc.rx_queue_depth, seconds_to_us(dcc.rx_service_s)),
        rng(stream_for(seed, id)) {}
};

}  // namespace

struct Simulator::Impl {
  const Scenario& scenario;
  const SimConfig& cfg;
  const SimSinks& sinks;
  SimResult result;

  TimeUs tick_us;
  TimeUs window_us;
  TimeUs airtime;
  double delivery_cutoff;
  double ed_cutoff;

  std::vector<VehicleState> veh;
  std::vector<std::uint32_t> active;
  std::vector<std::uint32_t> activation_order;  // sorted by first frame
  std::size_t next_activation = 0;

  VehicleGrid grid;
  std::priority_queue<Event, std::vector<Event>, EventLater> events;
  std::uint64_t next_ord = 0;
  TimeUs now = std::numeric_limits<TimeUs>::min();

  std::vector<PendingTx> pending;
  std::vector<std::uint64_t> pending_free;

  std::deque<Transmission> recent_tx;
  std::uint64_t tx_base = 0;

  std::vector<std::uint32_t> query_buf;

  Impl(const Scenario& s, const SimConfig& c, const SimSinks& k)
      : scenario(s), cfg(c), sinks(k) {
    cfg.radio.validate();
    cfg.cam.validate();
    tick_us = seconds_to_us(1.0 / scenario.meta.fps);
    window_us = seconds_to_us(cfg.dcc.cbr_window_s);
    airtime = airtime_us(cfg.cam.cam_size_bytes, cfg.radio);
    delivery_cutoff = delivery_range_m(cfg.radio) * 1.1;
    ed_cutoff = ed_range_m(cfg.radio);
  }

  void push(TimeUs t, int kind, std::uint64_t payload) {
    events.push(Event{t, kind, next_ord++, payload});
  }

  void add_busy(VehicleState& v, TimeUs s, TimeUs e) {
    TimeUs a = std::max(s, v.busy_until);
    if (e > a) {
      v.busy_accum += e - a;
      v.busy_until = e;
    }
  }

  // Busy time that fell inside the window ending at boundary; the overhang of
  // a frame straddling the boundary is carried into the next window.
  double take_window_busy(VehicleState& v, TimeUs boundary) {
    TimeUs overhang = std::max<TimeUs>(0, v.busy_until - boundary);
    overhang = std::min(overhang, v.busy_accum);
    TimeUs in_window = v.busy_accum - overhang;
    v.busy_accum = overhang;
    return std::min(1.0, static_cast<double>(in_window) / window_us);
  }

  const FrameSample* sample_at(std::uint32_t vi, int frame) {
    const auto& frames = scenario.tracks[vi].frames;
    VehicleState& v = veh[vi];
    while (v.cursor < frames.size() && frames[v.cursor].frame < frame) ++v.cursor;
    if (v.cursor < frames.size() && frames[v.cursor].frame == frame) {
      return &frames[v.cursor];
    }
    return nullptr;  // gap in the recording; hold position, no CAM check
  }

  void rebuild_grid() {
    static thread_local std::vector<Point> pts;
    static thread_local std::vector<std::uint32_t> ids;
    pts.clear();
    ids.clear();
    for (std::uint32_t vi : active) {
      pts.push_back(veh[vi].pos);
      ids.push_back(vi);
    }
    grid.build(pts, ids, std::max(50.0, ed_cutoff / 4.0));
  }

  void start_transmission(std::uint32_t vi, const PendingTx& p, TimeUs t) {
    VehicleState& v = veh[vi];
    Transmission tx;
    tx.sender = vi;
    tx.start = t;
    tx.end = t + airtime;
    tx.pos = v.pos;
    tx.payload_bytes = p.payload_bytes;
    tx.seq = p.seq;
    std::uint64_t id = tx_base + recent_tx.size();
    recent_tx.push_back(tx);
    push(tx.end, kTxEnd, id);
    v.tx_start = tx.start;
    v.tx_end = tx.end;
    v.gate.on_transmit(t);
    ++result.tx_count;

    // Every vehicle inside energy-detect range (including the sender) senses
    // the channel busy for the frame duration.
    grid.query(tx.pos, ed_cutoff, query_buf);
    for (std::uint32_t u : query_buf) add_busy(veh[u], tx.start, tx.end);
  }

  std::uint64_t stash_pending(PendingTx p) {
    if (!pending_free.empty()) {
      std::uint64_t id = pending_free.back();
      pending_free.pop_back();
      pending[id] = p;
      return id;
    }
    pending.push_back(p);
    return pending.size() - 1;
  }

  void schedule_csma_attempt(std::uint32_t vi, std::uint64_t pending_id, TimeUs t) {
    VehicleState& v = veh[vi];
    TimeUs base = std::max({t, v.busy_until, v.tx_end});
    TimeUs backoff = static_cast<TimeUs>(v.rng.next_below(cfg.backoff_slots)) *
                     seconds_to_us(cfg.slot_s);
    push(base + seconds_to_us(cfg.aifs_s) + backoff, kTxAttempt, pending_id);
  }

  void on_cam(std::uint32_t vi, const Cam& cam, TimeUs t) {
    ++result.cam_count;
    if (sinks.cam) {
      sinks.cam(CamRecord{cam.sender, cam.seq, cam.t, cam.pos.x, cam.pos.y,
                          cam.speed, cam.heading, cam.size_bytes, cam.cause});
    }
    PendingTx p{vi, cam.seq, cam.size_bytes};
    if (cfg.csma == CsmaMode::Ideal) {
      start_transmission(vi, p, t);
    } else {
      schedule_csma_attempt(vi, stash_pending(p), t);
    }
  }

  void on_tick(TimeUs t) {
    long frame = static_cast<long>(t / tick_us);
    // Activate vehicles whose span begins at this frame.
    while (next_activation < activation_order.size()) {
      std::uint32_t vi = activation_order[next_activation];
      if (scenario.tracks[vi].first_frame() > frame) break;
      veh[vi].active = true;
      veh[vi].cursor = 0;
      active.push_back(vi);
      ++next_activation;
    }
    // Retire vehicles past their last frame.
    std::erase_if(active, [&](std::uint32_t vi) {
      if (scenario.tracks[vi].last_frame() < frame) {
        veh[vi].active = false;
        return true;
      }
      return false;
    });

    for (std::uint32_t vi : active) {
      if (const FrameSample* s = sample_at(vi, static_cast<int>(frame))) {
        veh[vi].pos = {s->x, s->y};
      }
    }
    rebuild_grid();

    for (std::uint32_t vi : active) {
      const FrameSample* s = sample_at(vi, static_cast<int>(frame));
      if (s == nullptr) continue;
      VehicleState& v = veh[vi];
      bool gate_open = v.gate.gate_open(t);
      bool fired = false;
      std::optional<Cam> cam = v.cam.step(*s, t, gate_open, &fired);
      if (fired) {
        ++v.counters.tx_attempts;
        if (!cam) ++v.counters.tx_suppressed;
      }
      if (cam) on_cam(vi, *cam, t);
    }
  }

  void on_tx_attempt(std::uint64_t pending_id, TimeUs t) {
    const PendingTx p = pending[pending_id];
    VehicleState& v = veh[p.vehicle];
    if (v.busy_until > t || v.tx_end > t) {
      schedule_csma_attempt(p.vehicle, pending_id, t);
      return;
    }
    pending_free.push_back(pending_id);
    start_transmission(p.vehicle, p, t);
  }

  void on_tx_end(std::uint64_t tx_id, TimeUs t) {
    const Transmission tx = recent_tx[tx_id - tx_base];
    grid.query(tx.pos, delivery_cutoff, query_buf);
    static thread_local std::vector<Candidate> candidates;
    candidates.clear();
    for (std::uint32_t u : query_buf) {
      if (u == tx.sender) continue;
      const VehicleState& vu = veh[u];
      bool overlapped_own_tx = vu.tx_start < tx.end && vu.tx_end > tx.start;
      candidates.push_back(Candidate{u, vu.pos, overlapped_own_tx});
    }
    static thread_local std::vector<Transmission> interferers;
    interferers.clear();
    for (const Transmission& i : recent_tx) {
      if (i.sender == tx.sender && i.start == tx.start) continue;
      if (i.start < tx.end && i.end > tx.start) interferers.push_back(i);
    }
    auto outcomes = resolve_receptions(tx, candidates, interferers, cfg.radio);
    const std::string& sender_id = scenario.tracks[tx.sender].id;
    for (ReceptionOutcome& o : outcomes) {
      VehicleState& r = veh[o.receiver];
      if (o.verdict == RxVerdict::Delivered) {
        ++r.counters.rx_offered;
        if (!r.rx_queue.offer(t)) {
          o.verdict = RxVerdict::RxSuppressed;
          ++r.counters.rx_suppressed;
        } else {
          ++result.delivered_count;
        }
      }
      ++result.reception_count;
      if (sinks.reception) {
        sinks.reception(ReceptionRecord{scenario.tracks[o.receiver].id, sender_id,
                                        tx.seq, t, o.verdict, o.rx_dbm,
                                        o.distance_m});
      }
    }
    // Transmissions ended this long ago can no longer overlap anything.
    while (!recent_tx.empty() && recent_tx.front().end <= t - 4 * airtime) {
      recent_tx.pop_front();
      ++tx_base;
    }
  }

  void on_window(TimeUs t) {
    int count = static_cast<int>(active.size());
    for (std::uint32_t vi : active) {
      VehicleState& v = veh[vi];
      double busy_frac = take_window_busy(v, t);
      v.meter.update(busy_frac);
      v.gate.on_cbr_window(v.meter.cbr);
      if (sinks.cbr) {
        sinks.cbr(CbrRecord{t, scenario.tracks[vi].id, v.meter.cbr, count});
      }
    }
  }

  SimResult run() {
    if (scenario.tracks.empty()) return std::move(result);

    veh.reserve(scenario.tracks.size());
    for (const VehicleTrack& t : scenario.tracks) {
      if (t.frames.empty()) throw ValidationError("track with no frames: " + t.id);
      veh.emplace_back(t.id, cfg.cam, cfg.dcc, cfg.seed);
      result.replayed_times[t.id] = t.running_time(scenario.meta.fps);
    }
    activation_order.resize(veh.size());
    for (std::uint32_t i = 0; i < veh.size(); ++i) activation_order[i] = i;
    std::sort(activation_order.begin(), activation_order.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                int fa = scenario.tracks[a].first_frame();
                int fb = scenario.tracks[b].first_frame();
                if (fa != fb) return fa < fb;
                return scenario.tracks[a].id < scenario.tracks[b].id;
              });

    int first_frame = scenario.tracks[activation_order.front()].first_frame();
    int last_frame = 0;
    for (const VehicleTrack& t : scenario.tracks) {
      last_frame = std::max(last_frame, t.last_frame());
    }
    TimeUs t_start = first_frame * tick_us;
    TimeUs t_end = last_frame * tick_us;

    push(t_start, kTick, 0);
    push(t_start + window_us, kWindow, 0);

    while (!events.empty()) {
      Event ev = events.top();
      events.pop();
      if (ev.t < now) throw std::logic_error("event queue time regression");
      now = ev.t;
      switch (ev.kind) {
        case kTick:
          on_tick(ev.t);
          if (ev.t + tick_us <= t_end) push(ev.t + tick_us, kTick, 0);
          break;
        case kWindow:
          on_window(ev.t);
          if (ev.t + window_us <= t_end + window_us) {
            if (ev.t < t_end) push(ev.t + window_us, kWindow, 0);
          }
          break;
        case kTxAttempt:
          on_tx_attempt(ev.payload, ev.t);
          break;
        case kTxEnd:
          on_tx_end(ev.payload, ev.t);
          break;
      }
    }

    for (const VehicleState& v : veh) result.suppression += v.counters;
    return std::move(result);
  }
};

Simulator::Simulator(const Scenario& scenario, SimConfig config, SimSinks sinks)
    : scenario_(scenario), config_(std::move(config)), sinks_(std::move(sinks)) {}

SimResult Simulator::run() {
  Impl impl(scenario_, config_, sinks_);
  return impl.run();
}

}  // namespace v2x
