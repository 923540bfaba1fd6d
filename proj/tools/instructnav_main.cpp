#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "instructnav/metrics.hpp"
#include "instructnav/runner.hpp"
#include "instructnav/simulator.hpp"

namespace {

using namespace instructnav;

int cmd_run(const std::string& suite_path, eval::RunOptions options,
            const std::string& results_path) {
  const eval::ScenarioSuite suite = eval::load_suite(suite_path);
  if (!options.dump_dir.empty()) std::filesystem::create_directories(options.dump_dir);
  if (!options.transcript_dir.empty()) std::filesystem::create_directories(options.transcript_dir);

  const auto results = eval::run_suite(suite, options);
  eval::write_results(results, results_path);

  int failures = 0;
  for (const auto& r : results) {
    std::cout << r.id << ": " << (r.success ? "success" : "failure")
              << " (stop=" << (r.planner_error ? "PlannerError" : plan::to_string(r.stop_reason))
              << ", NE=" << r.nav_error << " m, steps=" << r.step_count << ")\n";
    if (r.planner_error) ++failures;
  }
  std::cout << "results written to " << results_path << "\n";
  std::cout << eval::format_metrics(eval::compute_metrics(results));
  return failures == 0 ? 0 : 1;
}

int cmd_metrics(const std::string& results_path) {
  const auto results = eval::read_results(results_path);
  const auto table = eval::compute_metrics(results);
  std::cout << eval::format_metrics(table);
  if (!(table.spl <= table.sr + 1e-9 && table.sr <= table.osr + 1e-9)) {
    std::cerr << "metric bounds violated: expected SPL <= SR <= OSR\n";
    return 1;
  }
  return 0;
}

int cmd_validate_scene(const std::string& scene_path) {
  try {
    const sim::Scene scene = sim::load_scene(scene_path);
    std::cout << "ok: " << scene.name << " (" << scene.width << "x" << scene.height << ", "
              << scene.label_table.size() << " labels, " << scene.spawns.size() << " spawns)\n";
    return 0;
  } catch (const sim::SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"InstructNav-style instruction navigation engine"};
  app.require_subcommand(1);

  std::string suite_path, results_path = "results.jsonl", scene_path, out_dir;
  eval::RunOptions options;
  std::string backend = "scripted";
  int n_directions = 6;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("suite", suite_path, "scenario suite file")->required();
    cmd->add_option("--results", results_path, "results output file");
    cmd->add_option("--dump-maps", options.dump_dir, "directory for value-map dumps");
    cmd->add_option("--seed", options.config.seed, "run seed");
    cmd->add_option("--n-directions", n_directions, "panorama tile count")
        ->check(CLI::IsMember({4, 6, 12}));
    cmd->add_option("--max-steps", options.config.max_steps, "low-level step budget");
    cmd->add_option("--parallel", options.parallel, "episodes run in parallel")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "run a scenario suite");
  add_run_flags(run);
  run->add_option("--backend", backend, "planner/judge backend")
      ->check(CLI::IsMember({"scripted", "replay", "remote"}));
  run->add_option("--transcripts", options.transcript_dir,
                  "transcript directory (written for remote, read for replay)");

  CLI::App* record = app.add_subcommand("record", "run a suite and record transcripts");
  add_run_flags(record);
  record->add_option("--backend", backend, "planner/judge backend")
      ->check(CLI::IsMember({"scripted", "remote"}));
  record->add_option("--out-dir", out_dir, "transcript output directory")->required();

  CLI::App* replay = app.add_subcommand("replay", "re-run a suite from recorded transcripts");
  add_run_flags(replay);
  replay->add_option("--transcripts", out_dir, "transcript directory")->required();

  CLI::App* metrics = app.add_subcommand("metrics", "compute SR/OSR/SPL/NE/TL from a results file");
  metrics->add_option("results", results_path, "results file")->required();

  CLI::App* validate = app.add_subcommand("validate-scene", "check a scene document");
  validate->add_option("scene", scene_path, "scene file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  options.config.n_directions = n_directions;

  try {
    if (run->parsed()) {
      options.mode = backend == "remote"  ? eval::BackendMode::Remote
                     : backend == "replay" ? eval::BackendMode::Replay
                                            : eval::BackendMode::Scripted;
      return cmd_run(suite_path, options, results_path);
    }
    if (record->parsed()) {
      options.mode =
          backend == "remote" ? eval::BackendMode::Remote : eval::BackendMode::Scripted;
      options.record = true;
      options.transcript_dir = out_dir;
      return cmd_run(suite_path, options, results_path);
    }
    if (replay->parsed()) {
      options.mode = eval::BackendMode::Replay;
      options.transcript_dir = out_dir;
      return cmd_run(suite_path, options, results_path);
    }
    if (metrics->parsed()) return cmd_metrics(results_path);
    if (validate->parsed()) return cmd_validate_scene(scene_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
