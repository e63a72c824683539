#include "v2xsim/cam_engine.hpp"

#include <cmath>

namespace v2x {

const char* to_string(CamCause c) {
  switch (c) {
    case CamCause::TimeElapsed: return "TimeElapsed";
    case CamCause::Position: return "Position";
    case CamCause::Speed: return "Speed";
    case CamCause::Heading: return "Heading";
    case CamCause::Mixed: return "Mixed";
  }
  return "?";
}

CamCause cam_cause_from_string(const std::string& s) {
  if (s == "TimeElapsed") return CamCause::TimeElapsed;
  if (s == "Position") return CamCause::Position;
  if (s == "Speed") return CamCause::Speed;
  if (s == "Heading") return CamCause::Heading;
  if (s == "Mixed") return CamCause::Mixed;
  throw DataError("unknown CAM cause: " + s);
}

double heading_delta(double h1_deg, double h2_deg) {
  double d = std::fabs(h1_deg - h2_deg);
  return std::min(d, 360.0 - d);
}

std::optional<CamCause> check_triggers(const CamState& state,
                                       const FrameSample& sample,
                                       const CamConfig& cfg) {
  TimeUs t = seconds_to_us(sample.t);
  TimeUs dt = t - state.last_gen;
  if (dt >= seconds_to_us(cfg.t_gen_min_s)) {
    double dp = distance(state.ref_pos, Point{sample.x, sample.y});
    double dv = std::fabs(sample.speed - state.ref_speed);
    double dh = heading_delta(sample.heading, state.ref_heading);
    int hits = 0;
    CamCause cause = CamCause::TimeElapsed;
    if (dp >= cfg.d_pos_m) { ++hits; cause = CamCause::Position; }
    if (dv >= cfg.d_speed_mps) { ++hits; cause = CamCause::Speed; }
    if (dh >= cfg.d_heading_deg) { ++hits; cause = CamCause::Heading; }
    if (hits >= 2) return CamCause::Mixed;
    if (hits == 1) return cause;
  }
  if (dt >= seconds_to_us(cfg.t_gen_max_s)) return CamCause::TimeElapsed;
  return std::nullopt;
}

void CamGenerator::init(const FrameSample& sample, TimeUs t) {
  state_.last_gen = t;
  state_.ref_pos = {sample.x, sample.y};
  state_.ref_speed = sample.speed;
  state_.ref_heading = sample.heading;
  initialized_ = true;
}

std::optional<Cam> CamGenerator::step(const FrameSample& sample, TimeUs t,
                                      bool gate_open, bool* trigger_fired) {
  if (trigger_fired) *trigger_fired = false;
  if (!initialized_) {
    init(sample, t);
    return std::nullopt;
  }
  auto cause = check_triggers(state_, sample, cfg_);
  if (!cause) return std::nullopt;
  if (trigger_fired) *trigger_fired = true;
  if (!gate_open) return std::nullopt;

  Cam cam;
  cam.sender = sender_;
  cam.seq = next_seq_++;
  cam.t = t;
  cam.pos = {sample.x, sample.y};
  cam.speed = sample.speed;
  cam.heading = sample.heading;
  cam.size_bytes = cfg_.cam_size_bytes;
  cam.cause = *cause;

  state_.last_gen = t;
  state_.ref_pos = cam.pos;
  state_.ref_speed = cam.speed;
  state_.ref_heading = cam.heading;
  return cam;
}

}  // namespace v2x
