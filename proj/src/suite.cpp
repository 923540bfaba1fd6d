#include "instructnav/suite.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace instructnav::eval {

namespace {

using nlohmann::json;

std::string dirname_of(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

std::string join_path(const std::string& base, const std::string& rel) {
  if (rel.empty() || rel.front() == '/') return rel;
  return base + "/" + rel;
}

dcon::TaskKind parse_task_kind(const std::string& s) {
  if (s == "ObjectNav" || s == "objectnav") return dcon::TaskKind::ObjectNav;
  if (s == "VLN" || s == "vln") return dcon::TaskKind::VLN;
  if (s == "DemandNav" || s == "demandnav") return dcon::TaskKind::DemandNav;
  throw std::invalid_argument("unknown task_kind '" + s + "'");
}

sim::GoalSpec parse_goal_json(const json& g) {
  sim::GoalSpec goal;
  const std::string kind = g.value("kind", "");
  goal.success_radius = g.value("success_radius", 1.0);
  if (kind == "object") {
    goal.kind = sim::GoalSpec::Kind::ObjectCategory;
    goal.label = g.at("label").get<std::string>();
  } else if (kind == "point") {
    goal.kind = sim::GoalSpec::Kind::Point;
    goal.x = g.at("x").get<double>();
    goal.y = g.at("y").get<double>();
  } else if (kind == "region") {
    goal.kind = sim::GoalSpec::Kind::Region;
    for (const auto& rc : g.at("cells"))
      goal.region.push_back(Cell{rc.at(0).get<int>(), rc.at(1).get<int>()});
  } else {
    throw std::invalid_argument("unknown goal kind '" + kind + "'");
  }
  return goal;
}

dcon::DconStep parse_step_json(const json& s) {
  dcon::DconStep step;
  step.reason = s.value("reason", "");
  const std::string action = s.value("action", "");
  auto parsed = dcon::parse_action(action);
  if (!parsed) throw std::invalid_argument("unknown scripted action '" + action + "'");
  step.action = *parsed;
  if (s.contains("landmarks"))
    for (const auto& lm : s["landmarks"]) step.landmarks.push_back(lm.get<std::string>());
  step.flag = s.value("flag", false);
  return step;
}

}  // namespace

ScenarioSuite load_suite_text(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("suite is not valid JSON: ") + e.what());
  }
  ScenarioSuite suite;
  if (doc.contains("scene")) suite.default_scene_path = join_path(base_dir, doc["scene"]);
  if (!doc.contains("episodes") || !doc["episodes"].is_array() || doc["episodes"].empty())
    throw std::invalid_argument("suite has no episodes");

  for (const auto& e : doc["episodes"]) {
    Episode ep;
    ep.id = e.value("id", "episode-" + std::to_string(suite.episodes.size()));
    ep.instruction = e.value("instruction", "");
    ep.task_kind = parse_task_kind(e.value("task_kind", "ObjectNav"));
    if (!e.contains("goal")) throw std::invalid_argument("episode '" + ep.id + "' has no goal");
    ep.goal = parse_goal_json(e["goal"]);
    if (!e.contains("spawn")) throw std::invalid_argument("episode '" + ep.id + "' has no spawn");
    const auto& s = e["spawn"];
    ep.spawn.x = s.at("x").get<double>();
    ep.spawn.y = s.at("y").get<double>();
    ep.spawn.heading = normalize_angle(s.value("heading_deg", 0.0) * kPi / 180.0);
    ep.seed = e.value("seed", 0ULL);
    if (e.contains("planner_script"))
      for (const auto& step : e["planner_script"]) ep.planner_script.push_back(parse_step_json(step));
    if (e.contains("judge_script"))
      for (const auto& reply : e["judge_script"]) ep.judge_script.push_back(reply.get<std::string>());

    std::string scene_path = suite.default_scene_path;
    if (e.contains("scene")) scene_path = join_path(base_dir, e["scene"]);
    if (scene_path.empty())
      throw std::invalid_argument("episode '" + ep.id + "' has no scene (and no suite default)");
    suite.episode_scene_paths.push_back(scene_path);
    suite.episodes.push_back(std::move(ep));
  }
  return suite;
}

ScenarioSuite load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open suite file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_suite_text(buf.str(), dirname_of(path));
}

}  // namespace instructnav::eval
