#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "corsched/errors.hpp"
#include "corsched/experiment.hpp"

using namespace corsched;

int main(int argc, char** argv) {
  CLI::App app{"Adaptive correction scheduling for constrained rollouts"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int jobs = -1;
  bool compact_traces = false;
  app.add_option("--config", config_path, "Experiment config file (defaults used if absent)");
  app.add_option("--out", out_dir, "Output directory (overrides config)");
  app.add_option("--jobs", jobs, "Worker threads (0 = hardware)");
  app.add_flag("--compact-traces", compact_traces,
               "Elide state sequences from trace records");

  auto* calibrate = app.add_subcommand("calibrate", "Build threshold surfaces");
  auto* run = app.add_subcommand("run", "Run the paired evaluation grid");
  auto* report = app.add_subcommand("report", "Aggregate cell records into tables");
  auto* pdm = app.add_subcommand("pdm", "Render sampler scenes and trajectories");
  auto* selftest = app.add_subcommand("selftest", "Run built-in oracle checks");

  bool with_traces = false;
  run->add_flag("--traces", with_traces, "Also write per-rollout trace records");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = config_path.empty()
                               ? ExperimentConfig::defaults()
                               : ExperimentConfig::from_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs >= 0) cfg.jobs = jobs;
    if (compact_traces) cfg.compact_traces = true;
    if (with_traces) cfg.write_traces = true;
    cfg.validate();

    ExperimentPaths paths{cfg.out_dir};

    if (calibrate->parsed()) {
      run_calibration(cfg, paths, std::cout);
      write_manifest(cfg, paths, "calibrate");
    } else if (run->parsed()) {
      GridResult result = run_grid(cfg, paths, std::cout);
      write_manifest(cfg, paths, "run");
      if (result.failed_cells > 0) {
        std::cerr << result.failed_cells << " cell(s) failed numerically\n";
        return 4;
      }
    } else if (report->parsed()) {
      auto cells = read_cells_jsonl(paths.cells());
      write_reports(cfg, paths, cells, std::cout);
      write_manifest(cfg, paths, "report");
    } else if (pdm->parsed()) {
      run_pdm_scenes(cfg, paths, std::cout);
      write_manifest(cfg, paths, "pdm");
    } else if (selftest->parsed()) {
      if (!run_selftest(std::cout)) return 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const MissingArtifactError& e) {
    std::cerr << "missing artifact: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
