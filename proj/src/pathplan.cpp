#include "instructnav/pathplan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <unordered_map>

namespace instructnav::plan {

namespace {

struct NodeKey {
  std::size_t operator()(const Cell& c) const { return CellHash{}(c); }
};

double edge_bearing_ticks(int dx, int dy) {
  // Axis bearings under the clockwise-positive convention:
  // +x -> 0 ticks, +y -> 9 (up the y axis is -bearing), etc.
  if (dx == 1 && dy == 0) return 0;
  if (dx == 0 && dy == 1) return 9;
  if (dx == -1 && dy == 0) return 6;
  if (dx == 0 && dy == -1) return 3;
  return -1;
}

}  // namespace

std::optional<Path> astar(const maps::ValueMap& m, const CellSet& nav, Cell start, Cell goal,
                          const AstarConfig& cfg) {
  if (!nav.count(goal) || !nav.count(start)) return std::nullopt;

  // Min-max normalize m over nav; a flat map costs as if every value
  // were maximal, reducing the search to plain shortest paths.
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (const Cell& c : nav) {
    const double v = m.at(c);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const bool flat = !(vmax > vmin);
  auto mhat = [&](Cell c) { return flat ? 1.0 : (m.at(c) - vmin) / (vmax - vmin); };
  auto step_cost = [&](Cell to, double step_len) {
    return step_len * (1.0 + cfg.beta * (1.0 - mhat(to)));
  };
  auto heuristic = [&](Cell c) {
    return std::hypot(static_cast<double>(c.x - goal.x), static_cast<double>(c.y - goal.y));
  };

  struct QItem {
    double f;
    double h;
    Cell cell;
    bool operator>(const QItem& o) const {
      if (f != o.f) return f > o.f;
      if (h != o.h) return h > o.h;
      return o.cell < cell;
    }
  };
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> open;
  std::unordered_map<Cell, double, NodeKey> g;
  std::unordered_map<Cell, Cell, NodeKey> parent;
  std::unordered_map<Cell, bool, NodeKey> closed;

  g[start] = 0.0;
  open.push(QItem{heuristic(start), heuristic(start), start});
  while (!open.empty()) {
    const QItem item = open.top();
    open.pop();
    const Cell c = item.cell;
    if (closed[c]) continue;
    closed[c] = true;
    if (c == goal) break;
    const double gc = g[c];
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell nc{c.x + dx, c.y + dy};
        if (!nav.count(nc)) continue;
        const bool diagonal = dx != 0 && dy != 0;
        if (diagonal && !nav.count(Cell{c.x + dx, c.y}) && !nav.count(Cell{c.x, c.y + dy}))
          continue;
        const double step_len = diagonal ? std::numbers::sqrt2 : 1.0;
        const double ng = gc + step_cost(nc, step_len);
        auto it = g.find(nc);
        if (it == g.end() || ng < it->second) {
          g[nc] = ng;
          parent[nc] = c;
          open.push(QItem{ng + heuristic(nc), heuristic(nc), nc});
        }
      }
  }
  if (!closed.count(goal) || !closed[goal]) return std::nullopt;

  Path path;
  path.cost = g[goal];
  Cell c = goal;
  path.cells.push_back(c);
  while (c != start) {
    c = parent[c];
    path.cells.push_back(c);
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

std::vector<sim::LowLevelAction> track_path(const Path& path, const sim::AgentState& state,
                                            const CellSet& nav) {
  std::vector<sim::LowLevelAction> actions;
  int ticks = state.heading_ticks;

  auto rotate_to = [&](int target_ticks) {
    int delta = (target_ticks - ticks) % 12;
    if (delta < 0) delta += 12;
    if (delta <= 6) {
      for (int k = 0; k < delta; ++k) actions.push_back(sim::LowLevelAction::RotRight30);
    } else {
      for (int k = 0; k < 12 - delta; ++k) actions.push_back(sim::LowLevelAction::RotLeft30);
    }
    ticks = target_ticks;
  };
  auto emit_axis_move = [&](int dx, int dy) {
    rotate_to(static_cast<int>(edge_bearing_ticks(dx, dy)));
    actions.push_back(sim::LowLevelAction::Forward);
  };

  for (std::size_t k = 0; k + 1 < path.cells.size(); ++k) {
    const Cell from = path.cells[k];
    const Cell to = path.cells[k + 1];
    const int dx = to.x - from.x;
    const int dy = to.y - from.y;
    if (dx == 0 && dy == 0) continue;
    if (dx == 0 || dy == 0) {
      emit_axis_move(dx, dy);
      continue;
    }
    // Diagonal: go through whichever axis-adjacent cell is open.
    const Cell via_x{from.x + dx, from.y};
    const Cell via_y{from.x, from.y + dy};
    if (nav.count(via_x)) {
      emit_axis_move(dx, 0);
      emit_axis_move(0, dy);
    } else if (nav.count(via_y)) {
      emit_axis_move(0, dy);
      emit_axis_move(dx, 0);
    } else {
      break;  // truncated; caller re-plans from wherever this ends
    }
  }
  return actions;
}

StopDecision should_stop(const dcon::DconChain& chain,
                         const std::optional<intuition::DirectionJudgment>& judgment,
                         int steps_taken, int max_steps, const world::WorldState& world) {
  StopDecision out;
  if (chain.current && chain.current->flag) {
    bool observed = false;
    for (const auto& landmark : chain.current->landmarks)
      if (!world.query_landmark_cells(landmark).empty()) {
        observed = true;
        break;
      }
    if (observed) {
      out.stop = true;
      out.reason = StopReason::DconFlag;
      return out;
    }
    out.force_replan = true;  // flagged stop with no observed landmark
  }
  if (judgment && judgment->stop) {
    out.stop = true;
    out.reason = StopReason::JudgeStop;
    return out;
  }
  if (steps_taken >= max_steps) {
    out.stop = true;
    out.reason = StopReason::Budget;
    return out;
  }
  return out;
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "None";
    case StopReason::DconFlag: return "DconFlag";
    case StopReason::JudgeStop: return "JudgeStop";
    case StopReason::Budget: return "Budget";
  }
  return "?";
}

}  // namespace instructnav::plan
