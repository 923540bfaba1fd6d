#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "instructnav/dcon_types.hpp"
#include "instructnav/worldmodel.hpp"

namespace instructnav::maps {

enum class MapSource { Semantic, Action, Trajectory, Intuition, Fused };

/// A scalar field over the world grid window. Per-source values live in
/// [0, 1]; the fused map in [0, 4].
struct ValueMap {
  GridFrame frame;
  MapSource source = MapSource::Semantic;
  std::vector<double> values;

  static ValueMap zeros(const GridFrame& f, MapSource s) {
    return ValueMap{f, s, std::vector<double>(f.cell_count(), 0.0)};
  }
  double at(Cell c) const { return frame.contains(c) ? values[frame.index_of(c)] : 0.0; }
  void set(Cell c, double v) {
    if (frame.contains(c)) values[frame.index_of(c)] = v;
  }
};

struct Waypoint {
  Cell cell;
  double world_x = 0.0;
  double world_y = 0.0;
  double value = 0.0;
};

class NoNavigableArea : public std::runtime_error {
 public:
  NoNavigableArea() : std::runtime_error("no navigable cell to select a waypoint from") {}
};

/// Closeness to the nearest landmark cell, min-max normalized over the
/// navigable set (1 = nearest). No landmarks -> all zero; all distances
/// equal -> 1 on every navigable cell.
ValueMap semantic_value_map(const GridFrame& frame, const CellSet& nav,
                            const CellSet& landmark_cells);

/// Distance from the walked trajectory, min-max normalized (1 = far).
/// Empty trajectory or uniform distances -> all zero.
ValueMap trajectory_value_map(const GridFrame& frame, const CellSet& nav,
                              const std::vector<Pose>& traj);

/// Sector / frontier assignment for the current plan action. Enter and
/// Exit must have been rewritten away before this call.
ValueMap action_value_map(const GridFrame& frame, dcon::NavAction action, const Pose& pose,
                          const world::WorldState& world);

/// 1 on navigable cells inside the 90-degree sector centered at
/// heading + (direction_id - 1) * 30 degrees, within `range` meters.
/// nullopt (EmptyProjection) when no navigable cell falls in the sector.
std::optional<ValueMap> intuition_value_map(const GridFrame& frame, int direction_id,
                                            const Pose& pose, const CellSet& nav,
                                            double range = 5.0);

/// Elementwise m_i + m_a + m_t + m_s with obstacle cells forced to zero.
ValueMap fuse(const ValueMap& m_i, const ValueMap& m_a, const ValueMap& m_t, const ValueMap& m_s,
              const CellSet& obstacles);

/// Argmax of m over the navigable set; ties broken by distance to the
/// pose, then by (x, y) order.
Waypoint select_waypoint(const ValueMap& m, const CellSet& nav, const Pose& pose);

}  // namespace instructnav::maps
