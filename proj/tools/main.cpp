#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "eqmorse/config.hpp"
#include "eqmorse/geometry.hpp"
#include "eqmorse/pipeline.hpp"
#include "eqmorse/report.hpp"

namespace {

enum Exit { ok = 0, config_error = 1, pipeline_error = 2, golden_mismatch = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant Morse-Bott cochain complexes for catalogued scenarios"};
  std::string config_path;
  std::string output_dir;
  std::string golden;
  int truncation = 0;
  bool emit_flows = false;
  bool verbose = false;
  app.add_option("config", config_path, "INI configuration file")->required();
  app.add_option("-o,--output", output_dir, "Output directory (overrides [output] directory)");
  app.add_flag("--emit-flows", emit_flows, "Write flows.csv with every witness and cover line");
  app.add_option("--golden", golden, "Compare the report against a golden file");
  app.add_option("--truncation", truncation, "Highest theta power of the Cartan complex")->check(CLI::Range(1, 64));
  app.add_flag("--verbose", verbose, "Log stages and timings to stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error;
  }

  eqmorse::RunConfig cfg;
  try {
    cfg = eqmorse::load_config(config_path);
    if (!output_dir.empty()) cfg.output_directory = output_dir;
    if (truncation > 0) {
      cfg.truncation = truncation;
      if (cfg.table_theta_max > truncation) cfg.table_theta_max = truncation;
    }
    cfg.emit_flows = cfg.emit_flows || emit_flows;
    cfg.verbose = cfg.verbose || verbose;
    eqmorse::validate_config(cfg);
    // Unknown scenario names and bad parameters are configuration errors.
    (void)eqmorse::build_scenario(cfg.scenario, cfg.params);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  }

  eqmorse::Logger log;
  if (cfg.verbose) log = [](const std::string& m) { std::cerr << "[eqmorse] " << m << "\n"; };

  eqmorse::RunReport report;
  std::string text;
  try {
    report = eqmorse::run(cfg, log);
    text = eqmorse::format_report(report);
    std::filesystem::create_directories(cfg.output_directory);
    const auto dir = std::filesystem::path(cfg.output_directory);
    eqmorse::write_report(report, (dir / "report.txt").string());
    if (cfg.emit_flows) eqmorse::emit_flow_csv(report, (dir / "flows.csv").string());
  } catch (const eqmorse::PipelineError& e) {
    std::cerr << "pipeline error in stage " << e.what() << "\n";
    return pipeline_error;
  } catch (const std::exception& e) {
    std::cerr << "pipeline error: output: " << e.what() << "\n";
    return pipeline_error;
  }

  std::cout << "report written to " << (std::filesystem::path(cfg.output_directory) / "report.txt").string() << "\n";
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";

  if (!golden.empty()) {
    try {
      const auto diff = eqmorse::compare_against_golden_file(text, golden);
      if (!diff.empty()) {
        for (const auto& l : diff.lines) std::cout << "golden diff: " << l << "\n";
        return golden_mismatch;
      }
      std::cout << "golden: match\n";
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return config_error;
    }
  }
  return ok;
}
