#pragma once

#include <optional>
#include <string>
#include <vector>

#include "v2xsim/kpi.hpp"
#include "v2xsim/sim_core.hpp"

namespace v2x {

struct RecordingInput {
  std::string tracks;
  std::string tracks_meta;
  std::string recording_meta;
};

// Orchestration config for the convert/simulate/analyze/report pipeline.
// Loaded from a JSON file; every field has a default except the recording
// paths. See configs/default.json for the full schema.
struct RunConfig {
  std::vector<RecordingInput> recordings;
  std::optional<std::string> network_path;
  std::string out_dir = "out";
  SimConfig sim;
  double d_max = 4.0;
  bool grid_search = false;
  double parked_displacement_m = 1.0;
  std::optional<std::vector<double>> bin_edges;  // default depends on layout
  std::optional<double> awareness_range_m;       // default: delivery range
  int jobs = 1;

  static RunConfig load(const std::string& path);
  std::uint64_t hash() const;
};

// Exit codes shared with the CLI: 0 ok, 2 validation, 3 runtime failure.
struct PipelineError : std::runtime_error {
  int exit_code;
  PipelineError(int code, const std::string& msg)
      : std::runtime_error(msg), exit_code(code) {}
};

struct ConvertSummary {
  struct Row {
    std::string recording_id;
    int location_id = 0;
    std::size_t vehicles_orig = 0;
    std::size_t vehicles_converted = 0;
    std::size_t parked = 0;
    std::size_t vru_skipped = 0;
    double delta_t_s = 0.0;
  };
  std::vector<Row> rows;
};

ConvertSummary cmd_convert(const RunConfig& cfg);
// Returns the number of failed scenario worlds (each isolated and reported).
int cmd_simulate(const RunConfig& cfg);
std::vector<KpiReport> cmd_analyze(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace v2x
