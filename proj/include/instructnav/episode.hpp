#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "instructnav/dcon.hpp"
#include "instructnav/intuition.hpp"
#include "instructnav/pathplan.hpp"
#include "instructnav/simulator.hpp"
#include "instructnav/valuemaps.hpp"
#include "instructnav/worldmodel.hpp"

namespace instructnav::eval {

struct RunConfig {
  int n_directions = 6;            // panorama tiles fed to the judge
  int max_steps = 500;             // low-level action budget
  int max_decision_steps = 50;     // DCoN re-plans per episode
  int max_lowlevel_per_decision = 10;
  int unreachable_mask_limit = 5;  // waypoint re-selections before re-planning
  int max_backend_calls = 50;
  // A flagged Approach step only completes once the agent is this close
  // to an observed landmark cell; after flag_patience re-plans the flag
  // is honored wherever the robot stands.
  double approach_complete_radius = 0.9;
  int flag_patience = 8;
  double hfov = kPi / 2.0;
  int ray_count = 91;
  double camera_height = 0.8;
  double max_range = 10.0;
  double intuition_range = 5.0;
  double astar_beta = 2.0;
  int inflate_radius = 1;
  std::uint64_t seed = 0;
};

struct Episode {
  std::string id;
  std::string instruction;
  dcon::TaskKind task_kind = dcon::TaskKind::ObjectNav;
  sim::GoalSpec goal;
  Pose spawn;
  std::uint64_t seed = 0;
  std::vector<dcon::DconStep> planner_script;  // used by the scripted backend
  std::vector<std::string> judge_script;
};

struct EpisodeBackends {
  std::unique_ptr<dcon::PlannerBackend> planner;
  std::unique_ptr<intuition::JudgeBackend> judge;
};

struct EpisodeResult {
  std::string id;
  bool success = false;
  bool oracle_success = false;
  double nav_error = 0.0;
  double traj_length = 0.0;
  double shortest_path = 0.0;
  int step_count = 0;
  int decision_steps = 0;
  plan::StopReason stop_reason = plan::StopReason::None;
  std::string error;  // non-empty when stop_reason degraded to a planner error
  bool planner_error = false;
  std::string transcript_ref;
  std::vector<Pose> trajectory;  // agent poses after every low-level action
  std::uint64_t trajectory_hash = 0;
};

/// Everything dump_maps needs about one decision step.
struct DecisionTrace {
  int decision_index = 0;
  maps::ValueMap semantic;
  maps::ValueMap action;
  maps::ValueMap trajectory;
  maps::ValueMap intuition;
  maps::ValueMap fused;
  maps::Waypoint waypoint;
  std::vector<Cell> astar_path;
  std::vector<Pose> traj_so_far;
};

using DecisionObserver = std::function<void(const DecisionTrace&)>;

/// Runs the full loop for one episode: plan the next chain step, judge
/// the panorama, build and fuse the four value maps, select a waypoint,
/// plan with A*, track it with rotate-then-forward actions while
/// integrating every new observation, and apply the stop policy.
/// Planner/judge failures are folded into the result (the suite keeps
/// going), and a fixed seed with deterministic backends makes the whole
/// run reproducible.
EpisodeResult run_episode(const sim::Scene& scene, const Episode& episode,
                          EpisodeBackends backends, const RunConfig& cfg,
                          const DecisionObserver& observer = {});

std::uint64_t hash_trajectory(const std::vector<Pose>& traj);

}  // namespace instructnav::eval
