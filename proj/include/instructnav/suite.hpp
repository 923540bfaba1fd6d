#pragma once

#include <map>
#include <string>
#include <vector>

#include "instructnav/episode.hpp"

namespace instructnav::eval {

/// A scenario suite: a default scene plus independently runnable
/// episodes (optionally overriding the scene per episode). Scene paths
/// are resolved relative to the suite file.
struct ScenarioSuite {
  std::string default_scene_path;
  std::vector<Episode> episodes;
  std::vector<std::string> episode_scene_paths;  // parallel to episodes
};

ScenarioSuite load_suite(const std::string& path);
ScenarioSuite load_suite_text(const std::string& text, const std::string& base_dir);

}  // namespace instructnav::eval
