#include "instructnav/episode.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>

#include "instructnav/llmclient.hpp"

namespace instructnav::eval {

namespace {

world::WorldConfig world_config(const sim::Scene& scene, const RunConfig& cfg) {
  world::WorldConfig wc;
  wc.resolution = scene.resolution;
  wc.inflate_radius = cfg.inflate_radius;
  wc.max_range = cfg.max_range;
  return wc;
}

/// Connected component of `nav` containing `from`, under the same
/// 8-connected adjacency rule A* plans with.
CellSet reachable_from(const CellSet& nav, Cell from) {
  CellSet seen;
  if (!nav.count(from)) return seen;
  std::vector<Cell> stack{from};
  seen.insert(from);
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell nc{c.x + dx, c.y + dy};
        if (!nav.count(nc) || seen.count(nc)) continue;
        if (dx != 0 && dy != 0 && !nav.count(Cell{c.x + dx, c.y}) &&
            !nav.count(Cell{c.x, c.y + dy}))
          continue;
        seen.insert(nc);
        stack.push_back(nc);
      }
  }
  return seen;
}

}  // namespace

std::uint64_t hash_trajectory(const std::vector<Pose>& traj) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (const Pose& p : traj) {
    mix(p.x);
    mix(p.y);
    mix(p.heading);
  }
  return h;
}

EpisodeResult run_episode(const sim::Scene& scene, const Episode& episode,
                          EpisodeBackends backends, const RunConfig& cfg,
                          const DecisionObserver& observer) {
  EpisodeResult result;
  result.id = episode.id;

  sim::SimConfig sim_cfg;
  sim_cfg.max_range = cfg.max_range;
  sim_cfg.camera_height = cfg.camera_height;

  sim::AgentState agent = sim::make_agent(scene, episode.spawn, cfg.camera_height);
  world::WorldState world(world_config(scene, cfg), scene.label_table);
  dcon::DconChain chain;
  chain.instruction = episode.instruction;

  llm::CallBudget budget(cfg.max_backend_calls);
  auto planner = llm::budgeted_planner(std::move(backends.planner), &budget);
  auto judge = llm::budgeted_judge(std::move(backends.judge), &budget);

  intuition::JudgeConfig judge_cfg;
  judge_cfg.intuition_range = cfg.intuition_range;

  result.trajectory.push_back(agent.pose);
  auto integrate_here = [&] {
    world.integrate_observation(sim::observe(scene, agent.pose, cfg.hfov, cfg.ray_count, sim_cfg));
  };
  integrate_here();

  int steps = 0;
  bool waypoint_reached = false;
  int flag_incomplete_rounds = 0;
  std::optional<intuition::DirectionJudgment> last_judgment;

  // Distance from the agent to the nearest observed landmark cell of the
  // current step (infinity when nothing is observed).
  auto landmark_distance = [&]() {
    double best = std::numeric_limits<double>::infinity();
    if (!chain.current) return best;
    const GridFrame f = world.frame();
    for (const auto& landmark : chain.current->landmarks)
      for (const Cell& c : world.query_landmark_cells(landmark))
        best = std::min(best, std::hypot(f.center_x(c) - agent.pose.x,
                                         f.center_y(c) - agent.pose.y));
    return best;
  };

  bool arrived_at_landmark = false;
  auto execute = [&](const std::vector<sim::LowLevelAction>& actions) {
    waypoint_reached = true;
    const bool final_approach = chain.current && chain.current->flag;
    int executed = 0;
    for (const sim::LowLevelAction a : actions) {
      if (steps >= cfg.max_steps) {
        waypoint_reached = false;
        return;
      }
      if (executed >= cfg.max_lowlevel_per_decision) {
        waypoint_reached = false;  // re-plan cadence
        return;
      }
      agent = sim::step(scene, agent, a, sim_cfg);
      ++steps;
      ++executed;
      result.trajectory.push_back(agent.pose);
      integrate_here();
      if (final_approach && landmark_distance() <= cfg.approach_complete_radius) {
        arrived_at_landmark = true;  // the flagged approach is done here
        return;
      }
      if (agent.collided) {
        waypoint_reached = false;  // stalled; re-plan
        return;
      }
    }
  };

  try {
    while (true) {
      if (result.decision_steps >= cfg.max_decision_steps) {
        result.stop_reason = plan::StopReason::Budget;
        break;
      }
      ++result.decision_steps;

      // Look around first: all 12 directional observations enter the
      // world model, so the planner sees every label visible from here.
      std::vector<intuition::DirectionalView> views;
      views.reserve(12);
      for (int id = 1; id <= 12; ++id) {
        Pose look = agent.pose;
        look.heading = normalize_angle(agent.pose.heading + (id - 1) * (kPi / 6.0));
        const world::Observation obs = sim::observe(scene, look, cfg.hfov, cfg.ray_count, sim_cfg);
        world.integrate_observation(obs);
        views.push_back({id, intuition::summarize_observation(obs, scene.label_table)});
      }

      chain = dcon::plan_next_step(chain, world.observed_labels(), episode.task_kind, *planner);

      const GridFrame frame = world.frame();
      const CellSet nav = world.extract_navigable();
      const intuition::Panorama pan = intuition::assemble_panorama(views, cfg.n_directions);
      intuition::IntuitionOutcome intuition_out = intuition::judge_with_feedback(
          pan, chain.instruction, dcon::to_string(chain.current->action),
          chain.current->landmarks, *judge, frame, nav, agent.pose, judge_cfg);
      last_judgment = intuition_out.judgment;
      if (intuition_out.exhausted)
        std::cerr << "[episode " << episode.id
                  << "] intuition re-prediction exhausted; continuing without it\n";

      if (intuition_out.judgment.stop) {
        const plan::StopDecision sd =
            plan::should_stop(chain, last_judgment, steps, cfg.max_steps, world);
        result.stop_reason = sd.stop ? sd.reason : plan::StopReason::JudgeStop;
        break;
      }

      CellSet landmark_cells;
      for (const auto& landmark : chain.current->landmarks) {
        const CellSet cells = world.query_landmark_cells(landmark);
        landmark_cells.insert(cells.begin(), cells.end());
      }

      const maps::ValueMap m_s = maps::semantic_value_map(frame, nav, landmark_cells);
      const maps::ValueMap m_a = maps::action_value_map(frame, chain.current->action, agent.pose, world);
      const maps::ValueMap m_t = maps::trajectory_value_map(frame, nav, world.traj());
      const maps::ValueMap fused =
          maps::fuse(intuition_out.map, m_a, m_t, m_s, world.obstacle_cells());

      // The agent's own cell can fall out of nav when a new wall inflates
      // over it; planning still has to start somewhere.
      const Cell agent_cell = world.cell_of(agent.pose.x, agent.pose.y);
      CellSet plan_nav = nav;
      plan_nav.insert(agent_cell);

      // Candidate waypoints are the navigable cells actually reachable
      // from the agent; cells seen through a gap but not yet connected
      // stay out of the argmax.
      CellSet reachable = reachable_from(plan_nav, agent_cell);
      reachable.erase(agent_cell);
      if (!nav.count(agent_cell)) {
        CellSet filtered;
        for (const Cell& c : reachable)
          if (nav.count(c)) filtered.insert(c);
        reachable = std::move(filtered);
      } else {
        reachable.insert(agent_cell);
      }

      maps::Waypoint waypoint;
      std::optional<plan::Path> path;
      CellSet masked_nav = std::move(reachable);
      bool planned = false;
      for (int masks = 0; masks <= cfg.unreachable_mask_limit; ++masks) {
        if (masked_nav.empty()) break;
        waypoint = maps::select_waypoint(fused, masked_nav, agent.pose);
        path = plan::astar(fused, plan_nav, agent_cell, waypoint.cell,
                           plan::AstarConfig{cfg.astar_beta});
        if (path) {
          planned = true;
          break;
        }
        masked_nav.erase(waypoint.cell);  // unreachable argmax; take the next best
      }
      if (!planned) {
        // Nothing reachable this round; burn a decision step and re-plan.
        if (chain.current->flag) {
          const double d = landmark_distance();
          if (std::isfinite(d) && d > cfg.approach_complete_radius &&
              flag_incomplete_rounds < cfg.flag_patience) {
            ++flag_incomplete_rounds;
            continue;
          }
        }
        const plan::StopDecision sd =
            plan::should_stop(chain, std::nullopt, steps, cfg.max_steps, world);
        if (sd.stop) {
          result.stop_reason = sd.reason;
          break;
        }
        continue;
      }

      if (observer) {
        DecisionTrace trace;
        trace.decision_index = result.decision_steps - 1;
        trace.semantic = m_s;
        trace.action = m_a;
        trace.trajectory = m_t;
        trace.intuition = intuition_out.map;
        trace.fused = fused;
        trace.waypoint = waypoint;
        trace.astar_path = path->cells;
        trace.traj_so_far = result.trajectory;
        observer(trace);
      }

      execute(plan::track_path(*path, agent, plan_nav));

      if (steps >= cfg.max_steps) {
        result.stop_reason = plan::StopReason::Budget;
        break;
      }
      if (waypoint_reached || arrived_at_landmark) {
        // An approach with a visible landmark is only finished when the
        // robot actually stands near it; give it a few more re-plans.
        if (chain.current->flag && !arrived_at_landmark) {
          const double d = landmark_distance();
          if (std::isfinite(d) && d > cfg.approach_complete_radius &&
              flag_incomplete_rounds < cfg.flag_patience) {
            ++flag_incomplete_rounds;
            continue;
          }
        }
        const plan::StopDecision sd =
            plan::should_stop(chain, std::nullopt, steps, cfg.max_steps, world);
        if (sd.stop) {
          result.stop_reason = sd.reason;
          break;
        }
      }
    }
  } catch (const PlannerFailure& e) {
    result.planner_error = true;
    result.error = e.what();
  } catch (const TransportError& e) {
    result.planner_error = true;
    result.error = e.what();
  } catch (const ProtocolError& e) {
    result.planner_error = true;
    result.error = e.what();
  } catch (const ReplayMiss& e) {
    result.planner_error = true;
    result.error = e.what();
  } catch (const CallBudgetExhausted&) {
    result.stop_reason = plan::StopReason::Budget;
  } catch (const maps::NoNavigableArea& e) {
    result.planner_error = true;
    result.error = e.what();
  }

  const sim::GoalCheck check = sim::check_goal(scene, episode.goal, result.trajectory);
  result.success = !result.planner_error && check.success;
  result.oracle_success = check.oracle_success;
  result.nav_error = check.nav_error;
  for (std::size_t k = 0; k + 1 < result.trajectory.size(); ++k)
    result.traj_length += std::hypot(result.trajectory[k + 1].x - result.trajectory[k].x,
                                     result.trajectory[k + 1].y - result.trajectory[k].y);
  const auto geodesic = sim::shortest_path_length(
      scene, episode.goal, scene.cell_of(episode.spawn.x, episode.spawn.y));
  result.shortest_path = geodesic.value_or(0.0);
  result.step_count = steps;
  result.trajectory_hash = hash_trajectory(result.trajectory);
  return result;
}

}  // namespace instructnav::eval
