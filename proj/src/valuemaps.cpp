#include "instructnav/valuemaps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace instructnav::maps {

namespace {

// Min-max normalization shared by the semantic and trajectory maps:
// writes f(norm(d)) for every nav cell, where norm is 0..1 over nav.
template <typename DistFn, typename ShapeFn>
ValueMap normalized_distance_map(const GridFrame& frame, const CellSet& nav, MapSource source,
                                 DistFn&& distance, ShapeFn&& shape, double degenerate_value) {
  ValueMap m = ValueMap::zeros(frame, source);
  if (nav.empty()) return m;
  std::vector<std::pair<Cell, double>> dists;
  dists.reserve(nav.size());
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -std::numeric_limits<double>::infinity();
  for (const Cell& c : nav) {
    const double d = distance(c);
    dists.emplace_back(c, d);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (dmax == dmin) {
    for (const auto& [c, d] : dists) m.set(c, degenerate_value);
    return m;
  }
  for (const auto& [c, d] : dists) m.set(c, shape((d - dmin) / (dmax - dmin)));
  return m;
}

}  // namespace

ValueMap semantic_value_map(const GridFrame& frame, const CellSet& nav,
                            const CellSet& landmark_cells) {
  if (landmark_cells.empty()) return ValueMap::zeros(frame, MapSource::Semantic);
  auto nearest = [&](Cell c) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cell& q : landmark_cells) best = std::min(best, cell_center_distance(frame, c, q));
    return best;
  };
  return normalized_distance_map(frame, nav, MapSource::Semantic, nearest,
                                 [](double n) { return 1.0 - n; },
                                 /*degenerate_value=*/1.0);
}

ValueMap trajectory_value_map(const GridFrame& frame, const CellSet& nav,
                              const std::vector<Pose>& traj) {
  if (traj.empty()) return ValueMap::zeros(frame, MapSource::Trajectory);
  auto nearest = [&](Cell c) {
    const double cx = frame.center_x(c), cy = frame.center_y(c);
    double best = std::numeric_limits<double>::infinity();
    for (const Pose& h : traj) best = std::min(best, std::hypot(cx - h.x, cy - h.y));
    return best;
  };
  return normalized_distance_map(frame, nav, MapSource::Trajectory, nearest,
                                 [](double n) { return n; },
                                 /*degenerate_value=*/0.0);
}

ValueMap action_value_map(const GridFrame& frame, dcon::NavAction action, const Pose& pose,
                          const world::WorldState& world) {
  using dcon::NavAction;
  ValueMap m = ValueMap::zeros(frame, MapSource::Action);
  switch (action) {
    case NavAction::Approach:
      return m;  // realized through the semantic map
    case NavAction::Explore:
      for (const Cell& c : world.detect_frontiers()) m.set(c, 1.0);
      return m;
    case NavAction::MoveForward:
    case NavAction::TurnAround:
    case NavAction::TurnRight:
    case NavAction::TurnLeft: {
      double offset = 0.0;
      if (action == NavAction::TurnAround) offset = kPi;
      if (action == NavAction::TurnRight) offset = kPi / 2.0;
      if (action == NavAction::TurnLeft) offset = -kPi / 2.0;
      for (const Cell& c : world.extract_navigable())
        if (in_sector(frame, c, pose, offset)) m.set(c, 1.0);
      return m;
    }
    case NavAction::Enter:
    case NavAction::Exit:
      throw std::logic_error("Enter/Exit must be rewritten before the action value map");
  }
  return m;
}

std::optional<ValueMap> intuition_value_map(const GridFrame& frame, int direction_id,
                                            const Pose& pose, const CellSet& nav, double range) {
  if (direction_id < 1 || direction_id > 12)
    throw std::invalid_argument("direction_id must be in 1..12");
  const double offset = (direction_id - 1) * (kPi / 6.0);
  ValueMap m = ValueMap::zeros(frame, MapSource::Intuition);
  bool any = false;
  for (const Cell& c : nav) {
    const double dx = frame.center_x(c) - pose.x;
    const double dy = frame.center_y(c) - pose.y;
    if (std::hypot(dx, dy) > range) continue;
    if (!in_sector(frame, c, pose, offset)) continue;
    m.set(c, 1.0);
    any = true;
  }
  if (!any) return std::nullopt;
  return m;
}

ValueMap fuse(const ValueMap& m_i, const ValueMap& m_a, const ValueMap& m_t, const ValueMap& m_s,
              const CellSet& obstacles) {
  if (m_i.frame != m_a.frame || m_i.frame != m_t.frame || m_i.frame != m_s.frame)
    throw std::invalid_argument("fuse: value map frames differ");
  ValueMap m = ValueMap::zeros(m_i.frame, MapSource::Fused);
  for (std::size_t k = 0; k < m.values.size(); ++k)
    m.values[k] = m_i.values[k] + m_a.values[k] + m_t.values[k] + m_s.values[k];
  for (const Cell& c : obstacles) m.set(c, 0.0);
  return m;
}

Waypoint select_waypoint(const ValueMap& m, const CellSet& nav, const Pose& pose) {
  if (nav.empty()) throw NoNavigableArea();
  bool found = false;
  Cell best{};
  double best_value = 0.0;
  double best_dist = 0.0;
  for (std::size_t k = 0; k < m.values.size(); ++k) {
    const Cell c = m.frame.cell_at(k);
    if (!nav.count(c)) continue;
    const double v = m.values[k];
    const double dist = std::hypot(m.frame.center_x(c) - pose.x, m.frame.center_y(c) - pose.y);
    bool better = false;
    if (!found) {
      better = true;
    } else if (v != best_value) {
      better = v > best_value;
    } else if (dist != best_dist) {
      better = dist < best_dist;
    } else {
      better = c < best;
    }
    if (better) {
      found = true;
      best = c;
      best_value = v;
      best_dist = dist;
    }
  }
  if (!found) throw NoNavigableArea();  // nav cells all outside the map window
  return Waypoint{best, m.frame.center_x(best), m.frame.center_y(best), best_value};
}

}  // namespace instructnav::maps
