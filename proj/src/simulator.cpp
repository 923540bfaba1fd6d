#include "instructnav/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace instructnav::sim {

namespace {

using nlohmann::json;

constexpr double kSqrt3Over2 = 0.8660254037844386;

// dir = (cos(t*30deg), -sin(t*30deg)); axis and half entries are exact.
constexpr double kTickDirX[12] = {1.0,  kSqrt3Over2,  0.5,  0.0, -0.5, -kSqrt3Over2,
                                  -1.0, -kSqrt3Over2, -0.5, 0.0, 0.5,  kSqrt3Over2};
constexpr double kTickDirY[12] = {0.0, -0.5, -kSqrt3Over2, -1.0, -kSqrt3Over2, -0.5,
                                  0.0, 0.5,  kSqrt3Over2,  1.0,  kSqrt3Over2,  0.5};

int wrap12(int t) {
  t %= 12;
  return t < 0 ? t + 12 : t;
}

GoalSpec parse_goal(const json& g, const Scene& scene, std::vector<std::string>& errors,
                    const std::string& where) {
  GoalSpec goal;
  const std::string kind = g.value("kind", "");
  if (g.contains("success_radius")) {
    goal.success_radius = g["success_radius"].get<double>();
    if (!(goal.success_radius > 0.0))
      errors.push_back(where + ": success_radius must be > 0");
  }
  if (kind == "object") {
    goal.kind = GoalSpec::Kind::ObjectCategory;
    goal.label = g.value("label", "");
    if (goal.label.empty())
      errors.push_back(where + ": object goal needs a label");
    else if (!scene.label_ids.count(world::canonical_label(goal.label)))
      errors.push_back(where + ": goal label '" + goal.label + "' not present in scene");
  } else if (kind == "point") {
    goal.kind = GoalSpec::Kind::Point;
    if (!g.contains("x") || !g.contains("y")) {
      errors.push_back(where + ": point goal needs x and y");
    } else {
      goal.x = g["x"].get<double>();
      goal.y = g["y"].get<double>();
    }
  } else if (kind == "region") {
    goal.kind = GoalSpec::Kind::Region;
    if (!g.contains("cells") || !g["cells"].is_array() || g["cells"].empty()) {
      errors.push_back(where + ": region goal needs a non-empty cells array");
    } else {
      for (const auto& rc : g["cells"]) {
        if (!rc.is_array() || rc.size() != 2) {
          errors.push_back(where + ": region cells must be [x, y] pairs");
          break;
        }
        goal.region.push_back(Cell{rc[0].get<int>(), rc[1].get<int>()});
      }
    }
  } else {
    errors.push_back(where + ": unknown goal kind '" + kind + "'");
  }
  return goal;
}

}  // namespace

std::vector<Cell> Scene::object_cells(const std::string& label) const {
  const std::string canon = world::canonical_label(label);
  auto it = label_ids.find(canon);
  if (it == label_ids.end()) return {};
  std::vector<Cell> out;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Cell c{x, y};
      if (at(c).kind == CellKind::Object && at(c).label == it->second) out.push_back(c);
    }
  return out;
}

Scene load_scene_text(const std::string& text) {
  std::vector<std::string> errors;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scene document is not valid JSON: ") + e.what(),
                      {e.what()});
  }

  Scene scene;
  scene.name = doc.value("name", "unnamed");
  scene.resolution = doc.value("resolution", 0.25);
  if (!(scene.resolution > 0.0)) errors.push_back("resolution must be > 0");

  struct LegendEntry {
    CellKind kind;
    int label;
  };
  std::map<char, LegendEntry> legend;
  int next_label = 1;
  if (!doc.contains("legend") || !doc["legend"].is_object()) {
    errors.push_back("missing legend object");
  } else {
    for (const auto& [key, val] : doc["legend"].items()) {
      if (key.size() != 1) {
        errors.push_back("legend key '" + key + "' must be a single character");
        continue;
      }
      const std::string kind = val.value("kind", "");
      LegendEntry entry{CellKind::Floor, 0};
      if (kind == "wall") {
        entry.kind = CellKind::Wall;
      } else if (kind == "floor") {
        entry.kind = CellKind::Floor;
      } else if (kind == "object") {
        entry.kind = CellKind::Object;
      } else {
        errors.push_back("legend '" + key + "': unknown kind '" + kind + "'");
        continue;
      }
      std::string label = val.value("label", "");
      if (entry.kind == CellKind::Object && label.empty())
        errors.push_back("legend '" + key + "': object entries need a label");
      if (!label.empty()) {
        const std::string canon = world::canonical_label(label);
        auto it = scene.label_ids.find(canon);
        if (it == scene.label_ids.end()) {
          entry.label = next_label++;
          scene.label_ids[canon] = entry.label;
          scene.label_table[entry.label] = canon;
        } else {
          entry.label = it->second;
        }
      }
      legend[key[0]] = entry;
    }
  }
  if (!legend.count('#')) legend['#'] = LegendEntry{CellKind::Wall, 0};
  if (!legend.count('.')) legend['.'] = LegendEntry{CellKind::Floor, 0};

  if (!doc.contains("grid") || !doc["grid"].is_array() || doc["grid"].empty()) {
    errors.push_back("missing grid rows");
  } else {
    const auto& rows = doc["grid"];
    scene.height = static_cast<int>(rows.size());
    scene.width = static_cast<int>(rows[0].get<std::string>().size());
    if (scene.width < 3 || scene.height < 3)
      errors.push_back("grid must be at least 3x3");
    scene.cells.assign(static_cast<std::size_t>(scene.width) *
                           static_cast<std::size_t>(scene.height),
                       SceneCell{});
    for (int y = 0; y < scene.height; ++y) {
      const std::string row = rows[static_cast<std::size_t>(y)].get<std::string>();
      if (static_cast<int>(row.size()) != scene.width) {
        errors.push_back("grid row " + std::to_string(y) + " has length " +
                         std::to_string(row.size()) + ", expected " +
                         std::to_string(scene.width));
        continue;
      }
      for (int x = 0; x < scene.width; ++x) {
        auto it = legend.find(row[static_cast<std::size_t>(x)]);
        if (it == legend.end()) {
          errors.push_back("grid cell (" + std::to_string(x) + "," + std::to_string(y) +
                           "): character '" + std::string(1, row[static_cast<std::size_t>(x)]) +
                           "' not in legend");
          continue;
        }
        scene.cells[static_cast<std::size_t>(y) * scene.width + x] =
            SceneCell{it->second.kind, it->second.label};
      }
    }
    // Border must be Wall so rays and the agent can never leave the raster.
    for (int y = 0; y < scene.height; ++y)
      for (int x = 0; x < scene.width; ++x) {
        if (y != 0 && y != scene.height - 1 && x != 0 && x != scene.width - 1) continue;
        if (scene.cells[static_cast<std::size_t>(y) * scene.width + x].kind != CellKind::Wall)
          errors.push_back("border cell (" + std::to_string(x) + "," + std::to_string(y) +
                           ") must be a wall");
      }
  }

  if (doc.contains("spawns")) {
    for (std::size_t k = 0; k < doc["spawns"].size(); ++k) {
      const auto& s = doc["spawns"][k];
      Pose pose;
      pose.x = s.value("x", 0.0);
      pose.y = s.value("y", 0.0);
      const double deg = s.value("heading_deg", 0.0);
      if (std::fmod(deg, 30.0) != 0.0)
        errors.push_back("spawn " + std::to_string(k) + ": heading_deg must be a multiple of 30");
      pose.heading = normalize_angle(deg * kPi / 180.0);
      if (scene.width > 0 && !scene.is_floor(scene.cell_of(pose.x, pose.y)))
        errors.push_back("spawn " + std::to_string(k) + " is not on a floor cell");
      scene.spawns.push_back(pose);
    }
  }
  if (scene.spawns.empty()) errors.push_back("scene needs at least one spawn");

  if (doc.contains("goals")) {
    for (const auto& [name, g] : doc["goals"].items())
      scene.named_goals[name] = parse_goal(g, scene, errors, "goal '" + name + "'");
  }

  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "scene has " << errors.size() << " schema violation(s):";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw SchemaError(msg.str(), errors);
  }
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scene file: " + path, {"cannot open " + path});
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scene_text(buf.str());
}

double tick_dir_x(int ticks) { return kTickDirX[wrap12(ticks)]; }
double tick_dir_y(int ticks) { return kTickDirY[wrap12(ticks)]; }

AgentState make_agent(const Scene& scene, const Pose& spawn, double camera_height) {
  AgentState st;
  st.pose = spawn;
  st.pose.z = camera_height;
  st.heading_ticks = wrap12(static_cast<int>(std::llround(spawn.heading / (kPi / 6.0))));
  st.pose.heading = normalize_angle(st.heading_ticks * (kPi / 6.0));
  if (!scene.is_floor(scene.cell_of(st.pose.x, st.pose.y)))
    throw std::invalid_argument("agent spawn is not on a floor cell");
  return st;
}

AgentState step(const Scene& scene, const AgentState& state, LowLevelAction action,
                const SimConfig& cfg) {
  AgentState next = state;
  next.collided = false;
  switch (action) {
    case LowLevelAction::RotLeft30:
      next.heading_ticks = wrap12(state.heading_ticks - 1);
      break;
    case LowLevelAction::RotRight30:
      next.heading_ticks = wrap12(state.heading_ticks + 1);
      break;
    case LowLevelAction::Forward: {
      const double nx = state.pose.x + cfg.forward_step * tick_dir_x(state.heading_ticks);
      const double ny = state.pose.y + cfg.forward_step * tick_dir_y(state.heading_ticks);
      if (scene.is_floor(scene.cell_of(nx, ny))) {
        next.pose.x = nx;
        next.pose.y = ny;
      } else {
        next.collided = true;
      }
      break;
    }
  }
  next.pose.heading = normalize_angle(next.heading_ticks * (kPi / 6.0));
  return next;
}

world::Observation observe(const Scene& scene, const Pose& pose, double hfov, int ray_count,
                           const SimConfig& cfg) {
  if (!scene.is_floor(scene.cell_of(pose.x, pose.y)))
    throw std::invalid_argument("observe: pose is not on a floor cell");
  if (ray_count <= 0 || !(hfov > 0.0) || hfov > kPi)
    throw std::invalid_argument("observe: bad hfov/ray_count");

  world::Observation obs;
  obs.width = ray_count;
  obs.hfov = hfov;
  obs.pose = pose;
  obs.depth.assign(static_cast<std::size_t>(ray_count), 0.0);
  obs.semantic.assign(static_cast<std::size_t>(ray_count), 0);

  const GridFrame f = scene.frame();
  for (int u = 0; u < ray_count; ++u) {
    const double bearing = pose.heading + pixel_bearing(u, ray_count, hfov);
    RayWalker walker(f, pose.x, pose.y, heading_dir_x(bearing), heading_dir_y(bearing));
    double depth = cfg.max_range;
    int label = 0;
    while (walker.advance(cfg.max_range)) {
      const RayCell rc = walker.current();
      if (!scene.in_bounds(rc.cell)) break;  // unreachable behind the wall border
      const SceneCell& sc = scene.at(rc.cell);
      if (sc.kind != CellKind::Floor) {
        depth = rc.t_enter;
        label = sc.kind == CellKind::Object ? sc.label : 0;
        break;
      }
    }
    obs.depth[static_cast<std::size_t>(u)] = depth;
    obs.semantic[static_cast<std::size_t>(u)] = label;
  }
  return obs;
}

RayCoverage raycast_cells(const Scene& scene, const Pose& pose, double hfov, int ray_count,
                          const SimConfig& cfg) {
  RayCoverage cov;
  const GridFrame f = scene.frame();
  for (int u = 0; u < ray_count; ++u) {
    const double bearing = pose.heading + pixel_bearing(u, ray_count, hfov);
    RayWalker walker(f, pose.x, pose.y, heading_dir_x(bearing), heading_dir_y(bearing));
    Cell prev = walker.current().cell;
    while (walker.advance(cfg.max_range)) {
      const RayCell rc = walker.current();
      if (!scene.in_bounds(rc.cell)) break;
      if (scene.at(rc.cell).kind != CellKind::Floor) {
        cov.crossed.insert(prev);
        cov.hit.insert(rc.cell);
        break;
      }
      cov.crossed.insert(prev);
      prev = rc.cell;
    }
  }
  return cov;
}

std::vector<std::pair<double, double>> goal_points(const Scene& scene, const GoalSpec& goal) {
  std::vector<std::pair<double, double>> pts;
  const GridFrame f = scene.frame();
  switch (goal.kind) {
    case GoalSpec::Kind::ObjectCategory: {
      const auto cells = scene.object_cells(goal.label);
      if (cells.empty())
        throw std::invalid_argument("goal label '" + goal.label + "' has no instances in scene");
      for (const Cell& c : cells) pts.emplace_back(f.center_x(c), f.center_y(c));
      break;
    }
    case GoalSpec::Kind::Point:
      pts.emplace_back(goal.x, goal.y);
      break;
    case GoalSpec::Kind::Region:
      if (goal.region.empty()) throw std::invalid_argument("region goal has no cells");
      for (const Cell& c : goal.region) pts.emplace_back(f.center_x(c), f.center_y(c));
      break;
  }
  return pts;
}

GoalCheck check_goal(const Scene& scene, const GoalSpec& goal, const std::vector<Pose>& traj) {
  if (traj.empty()) throw std::invalid_argument("check_goal: empty trajectory");
  const auto pts = goal_points(scene, goal);
  auto dist_to_goal = [&pts](const Pose& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [gx, gy] : pts) best = std::min(best, std::hypot(p.x - gx, p.y - gy));
    return best;
  };
  GoalCheck out;
  out.nav_error = dist_to_goal(traj.back());
  out.success = out.nav_error <= goal.success_radius;
  for (const Pose& p : traj) {
    if (dist_to_goal(p) <= goal.success_radius) {
      out.oracle_success = true;
      break;
    }
  }
  return out;
}

std::optional<double> shortest_path_length(const Scene& scene, const GoalSpec& goal, Cell from) {
  const auto pts = goal_points(scene, goal);
  const GridFrame f = scene.frame();
  auto in_goal = [&](Cell c) {
    const double cx = f.center_x(c), cy = f.center_y(c);
    for (const auto& [gx, gy] : pts)
      if (std::hypot(cx - gx, cy - gy) <= goal.success_radius) return true;
    return false;
  };
  if (!scene.is_floor(from)) return std::nullopt;

  // Dijkstra over floor cells, 8-connected; diagonals need one open
  // axis-adjacent cell, matching the planner's traversal rule.
  const std::size_t n = static_cast<std::size_t>(scene.width) * scene.height;
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using QItem = std::pair<double, std::size_t>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> queue;
  auto idx = [&](Cell c) {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(scene.width) +
           static_cast<std::size_t>(c.x);
  };
  dist[idx(from)] = 0.0;
  queue.emplace(0.0, idx(from));
  while (!queue.empty()) {
    const auto [d, i] = queue.top();
    queue.pop();
    if (d > dist[i]) continue;
    const Cell c{static_cast<int>(i % scene.width), static_cast<int>(i / scene.width)};
    if (in_goal(c)) return d;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell nc{c.x + dx, c.y + dy};
        if (!scene.is_floor(nc)) continue;
        if (dx != 0 && dy != 0 && !scene.is_floor(Cell{c.x + dx, c.y}) &&
            !scene.is_floor(Cell{c.x, c.y + dy}))
          continue;
        const double step_len = (dx != 0 && dy != 0) ? std::numbers::sqrt2 : 1.0;
        const double nd = d + step_len * scene.resolution;
        if (nd < dist[idx(nc)]) {
          dist[idx(nc)] = nd;
          queue.emplace(nd, idx(nc));
        }
      }
  }
  return std::nullopt;
}

}  // namespace instructnav::sim
