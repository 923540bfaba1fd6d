#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "instructnav/worldmodel.hpp"

namespace instructnav::sim {

enum class CellKind : std::uint8_t { Floor, Wall, Object };

struct SceneCell {
  CellKind kind = CellKind::Floor;
  int label = 0;  // 0 = none
};

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string message, std::vector<std::string> violations)
      : std::runtime_error(std::move(message)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct GoalSpec {
  enum class Kind { ObjectCategory, Point, Region };
  Kind kind = Kind::ObjectCategory;
  std::string label;             // ObjectCategory
  double x = 0.0, y = 0.0;       // Point
  std::vector<Cell> region;      // Region
  double success_radius = 1.0;
};

/// Immutable grid scene: bordered cell raster, label vocabulary and
/// spawn poses. Loaded from the JSON scene document (see load_scene).
struct Scene {
  std::string name;
  int width = 0;
  int height = 0;
  double resolution = 0.25;
  std::vector<SceneCell> cells;
  std::map<int, std::string> label_table;          // id -> canonical name
  std::map<std::string, int> label_ids;            // name -> id
  std::vector<Pose> spawns;
  std::map<std::string, GoalSpec> named_goals;

  const SceneCell& at(Cell c) const {
    return cells[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(c.x)];
  }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height; }
  bool is_floor(Cell c) const { return in_bounds(c) && at(c).kind == CellKind::Floor; }
  GridFrame frame() const {
    GridFrame f;
    f.width = width;
    f.height = height;
    f.resolution = resolution;
    return f;
  }
  Cell cell_of(double x, double y) const { return frame().cell_of(x, y); }
  std::vector<Cell> object_cells(const std::string& label) const;
};

/// Parses and validates a scene JSON document. All schema violations are
/// collected into a single SchemaError.
Scene load_scene_text(const std::string& text);
Scene load_scene(const std::string& path);

enum class LowLevelAction { Forward, RotLeft30, RotRight30 };

/// Agent pose with the heading kept as an exact count of 30-degree
/// ticks, so repeated rotation never drifts.
struct AgentState {
  Pose pose;
  int heading_ticks = 0;  // heading = ticks * 30 degrees, clockwise
  bool collided = false;
};

AgentState make_agent(const Scene& scene, const Pose& spawn, double camera_height);

/// Exact direction of a 30-degree heading tick (axis entries are exact).
double tick_dir_x(int ticks);
double tick_dir_y(int ticks);

struct SimConfig {
  double forward_step = 0.25;
  double max_range = 10.0;
  double camera_height = 0.8;
};

/// Discrete dynamics: Forward translates forward_step meters unless the
/// destination cell is not Floor (pose unchanged, collided set);
/// rotations change heading by exactly 30 degrees.
AgentState step(const Scene& scene, const AgentState& state, LowLevelAction action,
                const SimConfig& cfg = {});

/// Renders the single-row depth + semantic image by casting one ray per
/// pixel across `hfov` centered on the pose heading. Depth is the
/// distance to the first Wall/Object cell boundary, clamped to
/// max_range; semantic is the hit cell's label (0 for Wall or no hit).
world::Observation observe(const Scene& scene, const Pose& pose, double hfov, int ray_count,
                           const SimConfig& cfg = {});

/// The per-ray cell coverage of observe(): cells fully crossed before
/// the hit (seen-through floor) and the hit cells. Shares the walker
/// with observe and integrate_observation, so the three agree exactly.
struct RayCoverage {
  CellSet crossed;
  CellSet hit;
};
RayCoverage raycast_cells(const Scene& scene, const Pose& pose, double hfov, int ray_count,
                          const SimConfig& cfg = {});

struct GoalCheck {
  bool success = false;
  bool oracle_success = false;
  double nav_error = 0.0;
};

/// Success / oracle-success / final-distance against the goal, where
/// goal points are object cell centers, the literal point, or region
/// cell centers.
GoalCheck check_goal(const Scene& scene, const GoalSpec& goal, const std::vector<Pose>& traj);

/// Geodesic distance in meters from `from` to the goal's success region
/// over Floor cells (8-connected, no corner cutting through non-floor).
/// Returns nullopt when the goal is unreachable.
std::optional<double> shortest_path_length(const Scene& scene, const GoalSpec& goal, Cell from);

/// Goal points of a goal spec (used by check_goal and the metrics).
std::vector<std::pair<double, double>> goal_points(const Scene& scene, const GoalSpec& goal);

}  // namespace instructnav::sim
