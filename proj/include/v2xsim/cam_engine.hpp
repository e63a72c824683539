#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "v2xsim/common.hpp"
#include "v2xsim/trajectory.hpp"

namespace v2x {

struct CamConfig {
  double t_gen_min_s = 0.100;
  double t_gen_max_s = 1.000;
  double d_pos_m = 4.0;
  double d_speed_mps = 0.5;
  double d_heading_deg = 4.0;
  int cam_size_bytes = 285;  // 85 or 285

  void validate() const {
    if (t_gen_min_s <= 0.0 || t_gen_min_s > t_gen_max_s) {
      throw ValidationError("require 0 < t_gen_min <= t_gen_max");
    }
    if (d_pos_m <= 0.0 || d_speed_mps <= 0.0 || d_heading_deg <= 0.0) {
      throw ValidationError("CAM trigger thresholds must be positive");
    }
  }
};

enum class CamCause { TimeElapsed, Position, Speed, Heading, Mixed };

const char* to_string(CamCause c);
CamCause cam_cause_from_string(const std::string& s);

struct CamState {
  TimeUs last_gen = 0;
  Point ref_pos;
  double ref_speed = 0.0;
  double ref_heading = 0.0;
};

struct Cam {
  std::string sender;
  std::uint32_t seq = 0;
  TimeUs t = 0;
  Point pos;
  double speed = 0.0;
  double heading = 0.0;
  int size_bytes = 0;
  CamCause cause = CamCause::TimeElapsed;
};

// Shortest angular distance between two headings, degrees in [0, 180].
double heading_delta(double h1_deg, double h2_deg);

// Trigger evaluation against the reference snapshot of the last generated CAM.
// Returns the generation cause when a CAM is due, nullopt otherwise. The
// dynamics triggers are armed only after t_gen_min; the time trigger fires at
// t_gen_max. Exactly one dynamics threshold exceeded gives that cause, two or
// more give Mixed.
std::optional<CamCause> check_triggers(const CamState& state,
                                       const FrameSample& sample,
                                       const CamConfig& cfg);

// Per-vehicle generation state machine. The state is initialized from the
// vehicle's first sample without emitting a CAM; the first CAM appears once a
// trigger fires against that snapshot.
class CamGenerator {
 public:
  CamGenerator(std::string sender, CamConfig cfg)
      : sender_(std::move(sender)), cfg_(cfg) {}

  bool initialized() const { return initialized_; }
  const CamState& state() const { return state_; }

  void init(const FrameSample& sample, TimeUs t);

  // Evaluates triggers at the given tick. When a trigger fires and the DCC
  // gate is open, a CAM is produced and the reference snapshot refreshed.
  // When the gate is closed the pending trigger is reported via
  // trigger_fired but no CAM is generated and the state is left untouched,
  // so the trigger re-fires at the next tick.
  std::optional<Cam> step(const FrameSample& sample, TimeUs t, bool gate_open,
                          bool* trigger_fired = nullptr);

 private:
  std::string sender_;
  CamConfig cfg_;
  CamState state_;
  bool initialized_ = false;
  std::uint32_t next_seq_ = 0;
};

}  // namespace v2x
