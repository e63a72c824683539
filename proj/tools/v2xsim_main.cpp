#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "v2xsim/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> csma;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "run configuration file (JSON)")
      ->required();
  cmd->add_option("--seed", f.seed, "override RNG seed");
  cmd->add_option("--jobs", f.jobs, "worker pool size over recordings");
  cmd->add_option("--csma", f.csma, "CSMA fidelity level")
      ->check(CLI::IsMember({"ideal", "csma"}));
  cmd->add_option("--out", f.out, "output directory");
}

v2x::RunConfig load_config(const CommonFlags& f) {
  v2x::RunConfig cfg = v2x::RunConfig::load(f.config_path);
  if (f.seed) cfg.sim.seed = *f.seed;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (f.csma) cfg.sim.csma = v2x::csma_mode_from_string(*f.csma);
  if (f.out) cfg.out_dir = *f.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajectory-driven V2X cooperative awareness simulator"};
  app.require_subcommand(1);

  CommonFlags convert_f, simulate_f, analyze_f, report_f;
  CLI::App* convert = app.add_subcommand(
      "convert", "parse recordings into scenario containers + conversion report");
  add_common(convert, convert_f);
  CLI::App* simulate =
      app.add_subcommand("simulate", "run the CAM/DCC/channel simulation");
  add_common(simulate, simulate_f);
  CLI::App* analyze =
      app.add_subcommand("analyze", "compute per-location KPI reports from logs");
  add_common(analyze, analyze_f);
  CLI::App* report =
      app.add_subcommand("report", "aggregate cross-location summary tables");
  add_common(report, report_f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (convert->parsed()) {
      auto cfg = load_config(convert_f);
      auto summary = v2x::cmd_convert(cfg);
      for (const auto& r : summary.rows) {
        std::cout << "converted " << r.recording_id << " (location "
                  << r.location_id << "): " << r.vehicles_converted
                  << " vehicles, " << r.parked << " parked, " << r.vru_skipped
                  << " VRUs skipped, delta_t=" << r.delta_t_s << " s\n";
      }
    } else if (simulate->parsed()) {
      auto cfg = load_config(simulate_f);
      int failures = v2x::cmd_simulate(cfg);
      if (failures > 0) {
        std::cerr << failures << " scenario world(s) failed\n";
        return 3;
      }
      std::cout << "simulation complete\n";
    } else if (analyze->parsed()) {
      auto cfg = load_config(analyze_f);
      auto reports = v2x::cmd_analyze(cfg);
      for (const auto& r : reports) {
        std::cout << "location " << r.location_id << ": IGG=" << r.mean_igg_s
                  << " s, IPG=" << r.mean_ipg_s << " s, PDR="
                  << (r.pdr ? std::to_string(*r.pdr) : std::string("undefined"))
                  << ", mean CBR=" << r.mean_cbr << "\n";
      }
    } else if (report->parsed()) {
      auto cfg = load_config(report_f);
      v2x::cmd_report(cfg);
      std::cout << "summary written\n";
    }
  } catch (const v2x::PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const v2x::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const v2x::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
