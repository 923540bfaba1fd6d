#pragma once

#include <optional>
#include <string>
#include <vector>

#include "instructnav/metrics.hpp"
#include "instructnav/suite.hpp"

namespace instructnav::eval {

enum class BackendMode { Scripted, Replay, Remote };

struct RunOptions {
  BackendMode mode = BackendMode::Scripted;
  int parallel = 1;
  std::string dump_dir;        // when set, per-decision map dumps
  std::string transcript_dir;  // record here (scripted/remote) or replay from here
  bool record = false;
  RunConfig config;
};

/// Runs every episode of the suite (episodes are independent; up to
/// `parallel` run concurrently) and returns the results sorted by
/// episode id. Each scene is loaded once and shared read-only.
std::vector<EpisodeResult> run_suite(const ScenarioSuite& suite, const RunOptions& options);

void write_results(const std::vector<EpisodeResult>& results, const std::string& path);
std::vector<EpisodeResult> read_results(const std::string& path);

}  // namespace instructnav::eval
