#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "instructnav/simulator.hpp"
#include "instructnav/worldmodel.hpp"
#include "support/scenes.hpp"

using namespace instructnav;
using sim::LowLevelAction;
using sim::Scene;

namespace {

const char* kMinimalScene = R"({
  "name": "mini",
  "resolution": 0.25,
  "legend": {
    "#": {"kind": "wall"},
    ".": {"kind": "floor"},
    "s": {"kind": "object", "label": "sofa"}
  },
  "grid": ["#####", "#...#", "#.s.#", "#...#", "#####"],
  "spawns": [{"x": 0.375, "y": 0.375, "heading_deg": 0}]
})";

}  // namespace

TEST_CASE("minimal scene loads with its label table") {
  const Scene scene = sim::load_scene_text(kMinimalScene);
  CHECK(scene.width == 5);
  CHECK(scene.height == 5);
  REQUIRE(scene.label_table.size() == 1);
  CHECK(scene.label_table.begin()->second == "sofa");
  CHECK(scene.object_cells("sofa") == std::vector<Cell>{{2, 2}});
}

TEST_CASE("non-wall border fails schema validation") {
  std::string text = kMinimalScene;
  const auto pos = text.find("#####\", \"#...#");
  REQUIRE(pos != std::string::npos);
  text.replace(text.find("\"#####\""), 7, "\"#.###\"");
  CHECK_THROWS_AS(sim::load_scene_text(text), sim::SchemaError);
  try {
    sim::load_scene_text(text);
  } catch (const sim::SchemaError& e) {
    CHECK(!e.violations().empty());
  }
}

TEST_CASE("schema errors are collected, not thrown one by one") {
  const char* bad = R"({
    "name": "bad",
    "resolution": -1.0,
    "legend": {".": {"kind": "floor"}, "#": {"kind": "wall"}},
    "grid": ["...", "...", "..."],
    "spawns": []
  })";
  try {
    sim::load_scene_text(bad);
    FAIL("expected SchemaError");
  } catch (const sim::SchemaError& e) {
    CHECK(e.violations().size() >= 3);  // resolution, border cells, missing spawn
  }
}

TEST_CASE("apartment fixture matches its hand-checked manifest") {
  const Scene scene = sim::load_scene(std::string(INSTRUCTNAV_FIXTURES_DIR) +
                                      "/apartment.scene.json");
  CHECK(scene.object_cells("doorway").size() == 2);
  CHECK(scene.label_table.size() >= 6);
  CHECK(!scene.spawns.empty());
}

TEST_CASE("observation depth quantization on an axis-aligned ray") {
  // Facing a wall two cells ahead: the reported depth is the distance
  // to the wall boundary, within half a cell of 2 * resolution.
  auto scene = test_scenes::empty_room(7, 5);
  Pose pose;
  pose.x = (4 + 0.5) * scene.resolution;  // cell (4,2); wall at x=6, boundary at 6*res
  pose.y = (2 + 0.5) * scene.resolution;
  pose.heading = 0.0;
  const auto obs = sim::observe(scene, pose, kPi / 2.0, 3, {});
  const double center = obs.depth[1];
  CHECK(center == doctest::Approx(1.5 * scene.resolution));  // boundary, not center
  CHECK(std::abs(center - 2.0 * scene.resolution) <= 0.5 * scene.resolution + 1e-12);
}

TEST_CASE("rays clamp at max range with semantic 0") {
  auto scene = test_scenes::empty_room(200, 5);
  Pose pose;
  pose.x = 1.5 * scene.resolution;
  pose.y = 2.5 * scene.resolution;
  pose.heading = 0.0;
  sim::SimConfig cfg;
  cfg.max_range = 10.0;
  const auto obs = sim::observe(scene, pose, kPi / 2.0, 3, cfg);
  CHECK(obs.depth[1] == 10.0);  // wall is ~49 m away
  CHECK(obs.semantic[1] == 0);
}

TEST_CASE("center ray reports the object label ahead") {
  const Scene scene = sim::load_scene_text(kMinimalScene);
  Pose pose;
  pose.x = (2 + 0.5) * scene.resolution;
  pose.y = (3 + 0.5) * scene.resolution;
  pose.heading = kPi / 2.0;  // -y, toward the sofa at (2,2)
  const auto obs = sim::observe(scene, pose, kPi / 2.0, 5, {});
  CHECK(obs.semantic[2] == scene.label_ids.at("sofa"));
  CHECK(obs.depth[2] == doctest::Approx(0.5 * scene.resolution));
}

TEST_CASE("observe requires a floor pose") {
  const Scene scene = sim::load_scene_text(kMinimalScene);
  Pose wall_pose;
  wall_pose.x = 0.1;
  wall_pose.y = 0.1;
  CHECK_THROWS_AS(sim::observe(scene, wall_pose, kPi / 2.0, 9, {}), std::invalid_argument);
}

TEST_CASE("step dynamics") {
  auto scene = test_scenes::empty_room(9, 9);
  Pose spawn;
  spawn.x = 4.5 * scene.resolution;
  spawn.y = 4.5 * scene.resolution;
  auto agent = sim::make_agent(scene, spawn, 0.8);

  SUBCASE("rotations invert each other") {
    auto s = sim::step(scene, agent, LowLevelAction::RotLeft30);
    s = sim::step(scene, s, LowLevelAction::RotRight30);
    CHECK(s.heading_ticks == agent.heading_ticks);
    CHECK(s.pose.heading == agent.pose.heading);
  }
  SUBCASE("twelve left turns are a full circle") {
    auto s = agent;
    for (int k = 0; k < 12; ++k) s = sim::step(scene, s, LowLevelAction::RotLeft30);
    CHECK(s.heading_ticks == agent.heading_ticks);
  }
  SUBCASE("a million rotations cannot drift the heading") {
    auto s = agent;
    for (int k = 0; k < 1'000'000; ++k) s = sim::step(scene, s, LowLevelAction::RotRight30);
    CHECK(s.heading_ticks == (agent.heading_ticks + 1'000'000) % 12);
    CHECK(s.pose.heading == normalize_angle(s.heading_ticks * kPi / 6.0));
  }
  SUBCASE("forward into a wall collides without moving") {
    auto s = agent;
    for (int k = 0; k < 64 && !s.collided; ++k) s = sim::step(scene, s, LowLevelAction::Forward);
    CHECK(s.collided);
    CHECK(scene.is_floor(scene.cell_of(s.pose.x, s.pose.y)));
    const auto again = sim::step(scene, s, LowLevelAction::Forward);
    CHECK(again.pose.x == s.pose.x);
    CHECK(again.collided);
  }
  SUBCASE("forward moves exactly one cell on the axis lattice") {
    const auto s = sim::step(scene, agent, LowLevelAction::Forward);
    CHECK(s.pose.x == doctest::Approx(spawn.x + 0.25));
    CHECK(s.pose.y == spawn.y);
    CHECK(!s.collided);
  }
}

TEST_CASE("agent pose is always on floor across random walks") {
  std::mt19937 rng(47);
  for (int round = 0; round < 10; ++round) {
    auto scene = test_scenes::random_scene(rng, 20, 20);
    auto agent = sim::make_agent(scene, scene.spawns[0], 0.8);
    std::uniform_int_distribution<int> act(0, 2);
    for (int k = 0; k < 300; ++k) {
      const auto a = static_cast<LowLevelAction>(act(rng));
      agent = sim::step(scene, agent, a);
      CHECK(scene.is_floor(scene.cell_of(agent.pose.x, agent.pose.y)));
    }
  }
}

TEST_CASE("identical inputs give bit-identical observations and states") {
  std::mt19937 rng(53);
  auto scene = test_scenes::random_scene(rng, 24, 18);
  std::vector<LowLevelAction> actions;
  std::uniform_int_distribution<int> act(0, 2);
  for (int k = 0; k < 120; ++k) actions.push_back(static_cast<LowLevelAction>(act(rng)));

  auto run = [&] {
    auto agent = sim::make_agent(scene, scene.spawns[0], 0.8);
    std::vector<double> trace;
    for (const auto a : actions) {
      agent = sim::step(scene, agent, a);
      const auto obs = sim::observe(scene, agent.pose, kPi / 2.0, 31, {});
      trace.push_back(agent.pose.x);
      trace.push_back(agent.pose.y);
      trace.push_back(agent.pose.heading);
      trace.insert(trace.end(), obs.depth.begin(), obs.depth.end());
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("check_goal: success, oracle success and distance") {
  const Scene scene = sim::load_scene_text(kMinimalScene);
  sim::GoalSpec goal;
  goal.kind = sim::GoalSpec::Kind::Point;
  goal.x = 1.0;
  goal.y = 1.0;
  goal.success_radius = 0.5;

  Pose on_goal;
  on_goal.x = 1.0;
  on_goal.y = 1.0;
  SUBCASE("final pose on the goal point") {
    const auto r = sim::check_goal(scene, goal, {on_goal});
    CHECK(r.success);
    CHECK(r.oracle_success);
    CHECK(r.nav_error == 0.0);
  }
  SUBCASE("passing through then leaving counts for oracle only") {
    Pose away;
    away.x = 1.0;
    away.y = 4.0;
    const auto r = sim::check_goal(scene, goal, {on_goal, away});
    CHECK(!r.success);
    CHECK(r.oracle_success);
    CHECK(r.nav_error == doctest::Approx(3.0));
  }
  SUBCASE("empty trajectory is an input error") {
    CHECK_THROWS_AS(sim::check_goal(scene, goal, {}), std::invalid_argument);
  }
}

TEST_CASE("object goals measure to the nearest instance") {
  auto scene = test_scenes::empty_room(12, 6);
  test_scenes::put_object(scene, {2, 2}, "plant");
  test_scenes::put_object(scene, {9, 2}, "plant");
  sim::GoalSpec goal;
  goal.kind = sim::GoalSpec::Kind::ObjectCategory;
  goal.label = "plant";
  Pose pose;
  pose.x = (8 + 0.5) * scene.resolution;
  pose.y = (2 + 0.5) * scene.resolution;
  const auto r = sim::check_goal(scene, goal, {pose});
  CHECK(r.nav_error == doctest::Approx(scene.resolution));  // one cell from (9,2)
  sim::GoalSpec unknown;
  unknown.kind = sim::GoalSpec::Kind::ObjectCategory;
  unknown.label = "piano";
  CHECK_THROWS_AS(sim::check_goal(scene, unknown, {pose}), std::invalid_argument);
}

TEST_CASE("integrating observations reconstructs visible occupancy") {
  // Round trip: world-model cell sets equal the renderer's own ray
  // coverage, and that coverage never misclassifies the scene truth.
  std::mt19937 rng(59);
  for (int round = 0; round < 15; ++round) {
    auto scene = test_scenes::random_scene(rng, 30, 24);
    Pose pose = scene.spawns[0];
    pose.z = 0.8;
    sim::SimConfig cfg;
    cfg.max_range = 50.0;  // cover the whole scene
    const auto obs = sim::observe(scene, pose, kPi / 2.0, 181, cfg);
    const auto cov = sim::raycast_cells(scene, pose, kPi / 2.0, 181, cfg);

    world::WorldConfig wc;
    wc.max_range = cfg.max_range;
    world::WorldState w(wc, scene.label_table);
    w.integrate_observation(obs);

    CHECK(w.ground_cells() == cov.crossed);
    CHECK(w.obstacle_cells() == cov.hit);
    for (const Cell& c : cov.crossed) CHECK(scene.at(c).kind == sim::CellKind::Floor);
    for (const Cell& c : cov.hit) CHECK(scene.at(c).kind != sim::CellKind::Floor);
  }
}
