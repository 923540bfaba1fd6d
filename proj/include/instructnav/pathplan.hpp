#pragma once

#include <optional>
#include <vector>

#include "instructnav/dcon_types.hpp"
#include "instructnav/intuition.hpp"
#include "instructnav/simulator.hpp"
#include "instructnav/valuemaps.hpp"

namespace instructnav::plan {

struct Path {
  std::vector<Cell> cells;  // start .. goal, consecutive cells 8-adjacent
  double cost = 0.0;        // in cell units under the value-weighted metric
};

struct AstarConfig {
  double beta = 2.0;  // weight of (1 - normalized value) in the step cost
};

/// A* over the navigable set, 8-connected (diagonals need one open
/// axis-adjacent cell). Each step into c' costs
/// step_len * (1 + beta * (1 - mhat(c'))) where mhat is m min-max
/// normalized over nav (1 everywhere when degenerate) and step_len is 1
/// or sqrt(2) cells. The Euclidean heuristic stays admissible because
/// every step costs at least step_len. Returns nullopt when the goal is
/// unreachable.
std::optional<Path> astar(const maps::ValueMap& m, const CellSet& nav, Cell start, Cell goal,
                          const AstarConfig& cfg = {});

/// Rotate-then-forward expansion of a cell path: for every edge, the
/// minimal +-30-degree rotation sequence onto the edge bearing, then one
/// Forward per cell. Diagonal edges decompose into the axis pair whose
/// intermediate cell is navigable; when both intermediates are blocked
/// the expansion truncates at that edge (caller re-plans).
std::vector<sim::LowLevelAction> track_path(const Path& path, const sim::AgentState& state,
                                            const CellSet& nav);

enum class StopReason { None, DconFlag, JudgeStop, Budget };

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::None;
  bool force_replan = false;  // premature flag guard tripped
};

/// Episode stop policy: DCoN flag (only honored when one of the current
/// step's landmarks has actually been observed), judge Stop, or the
/// low-level step budget — in that precedence order. A flag whose
/// landmarks were never observed is ignored for this step and forces a
/// re-plan instead.
StopDecision should_stop(const dcon::DconChain& chain,
                         const std::optional<intuition::DirectionJudgment>& judgment,
                         int steps_taken, int max_steps, const world::WorldState& world);

const char* to_string(StopReason r);

}  // namespace instructnav::plan
