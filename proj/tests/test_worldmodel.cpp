#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "instructnav/simulator.hpp"
#include "instructnav/worldmodel.hpp"
#include "support/scenes.hpp"

using namespace instructnav;
using world::Observation;
using world::WorldConfig;
using world::WorldState;

namespace {

WorldState fresh_world(std::map<int, std::string> labels = {}) {
  return WorldState(WorldConfig{}, std::move(labels));
}

Observation single_pixel(double depth, Pose pose) {
  Observation obs;
  obs.width = 1;
  obs.depth = {depth};
  obs.semantic = {0};
  obs.pose = pose;
  obs.hfov = kPi / 2.0;
  return obs;
}

}  // namespace

TEST_CASE("center pixel back-projects along the pose heading") {
  WorldState w = fresh_world();
  Pose pose;
  pose.z = 0.8;
  w.integrate_observation(single_pixel(2.0, pose));
  REQUIRE(w.pcd().size() == 1);
  CHECK(w.pcd()[0].x == doctest::Approx(2.0));
  CHECK(w.pcd()[0].y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.pcd()[0].z == 0.8);
  const Cell hit = w.cell_of(2.0, 0.0);
  CHECK(w.explored_cells().count(hit));
  CHECK(w.obstacle_cells().count(hit));
}

TEST_CASE("all-zero depth image only appends the pose") {
  WorldState w = fresh_world();
  Observation obs;
  obs.width = 4;
  obs.depth = {0.0, 0.0, 0.0, 0.0};
  obs.semantic = {0, 0, 0, 0};
  obs.pose.z = 0.8;
  w.integrate_observation(obs);
  CHECK(w.pcd().empty());
  CHECK(w.explored_cells().empty());
  CHECK(w.traj().size() == 1);
}

TEST_CASE("dimension mismatch is an input error") {
  WorldState w = fresh_world();
  Observation obs;
  obs.width = 3;
  obs.depth = {1.0, 1.0};
  obs.semantic = {0, 0, 0};
  CHECK_THROWS_AS(w.integrate_observation(obs), std::invalid_argument);
}

TEST_CASE("points above the obstacle height band are ignored") {
  WorldState w = fresh_world();
  Pose pose;
  pose.z = 2.5;  // above obstacle_height_max = 1.5
  w.integrate_observation(single_pixel(2.0, pose));
  CHECK(w.pcd().empty());
  CHECK(w.obstacle_cells().empty());
}

TEST_CASE("same wall observed from two poses gives one obstacle set") {
  auto scene = test_scenes::empty_room(9, 7);
  sim::SimConfig cfg;
  Pose a, b;
  a.x = 2.5 * 0.25; a.y = 3.5 * 0.25; a.heading = 0.0; a.z = 0.8;   // cell (2,3), facing +x
  b.x = 4.5 * 0.25; b.y = 2.5 * 0.25; b.heading = 0.0; b.z = 0.8;   // cell (4,2), facing +x

  WorldState wa = fresh_world();
  wa.integrate_observation(sim::observe(scene, a, kPi / 2.0, 181, cfg));
  WorldState wb = fresh_world();
  wb.integrate_observation(sim::observe(scene, b, kPi / 2.0, 181, cfg));

  // Both poses fan densely over the east wall segment; restrict the
  // comparison to wall cells both cones cover.
  CellSet east_a, east_b;
  for (const Cell& c : wa.obstacle_cells())
    if (c.x == 8 && c.y >= 2 && c.y <= 4) east_a.insert(c);
  for (const Cell& c : wb.obstacle_cells())
    if (c.x == 8 && c.y >= 2 && c.y <= 4) east_b.insert(c);
  CHECK(east_a == east_b);
  CHECK(!east_a.empty());
}

TEST_CASE("extract_navigable subtracts obstacles and their inflation") {
  SUBCASE("empty world") { CHECK(fresh_world().extract_navigable().empty()); }

  // 5x5 explored floor, obstacle dropped on the center.
  auto make = [](int inflate) {
    WorldConfig cfg;
    cfg.inflate_radius = inflate;
    WorldState w(cfg, {});
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x) w.mark_ground({x, y});
    w.mark_obstacle({2, 2});
    return w;
  };
  SUBCASE("inflate 0 removes just the obstacle cell") {
    CHECK(make(0).extract_navigable().size() == 24);
  }
  SUBCASE("inflate 1 removes the 8-neighborhood too") {
    CHECK(make(1).extract_navigable().size() == 16);
  }
}

TEST_CASE("frontiers are navigable cells touching unexplored space") {
  SUBCASE("closed room has none") {
    WorldState w = fresh_world();
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        w.mark_explored({x, y});
        if (x > 0 && y > 0 && x < 5 && y < 5) w.mark_ground({x, y});
      }
    // Seal the ring around the explored block as well.
    for (int k = -1; k < 7; ++k) {
      w.mark_explored({k, -1});
      w.mark_explored({k, 6});
      w.mark_explored({-1, k});
      w.mark_explored({6, k});
    }
    CHECK(w.detect_frontiers().empty());
  }
  SUBCASE("half-explored floor exposes the boundary column") {
    // 10x10 floor, walls around it, only the left half explored: the
    // frontier is exactly the column next to the unexplored half.
    WorldConfig cfg;
    cfg.inflate_radius = 0;
    WorldState w(cfg, {});
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 5; ++x) w.mark_ground({x, y});
    for (int y = -1; y <= 10; ++y) w.mark_explored({-1, y});
    for (int x = 0; x < 5; ++x) {
      w.mark_explored({x, -1});
      w.mark_explored({x, 10});
    }
    const CellSet frontiers = w.detect_frontiers();
    CHECK(frontiers.size() == 10);
    for (int y = 0; y < 10; ++y) CHECK(frontiers.count({4, y}));
  }
  SUBCASE("single explored navigable cell is its own frontier") {
    WorldState w = fresh_world();
    w.mark_ground({3, 3});
    const CellSet frontiers = w.detect_frontiers();
    REQUIRE(frontiers.size() == 1);
    CHECK(frontiers.count({3, 3}));
  }
}

TEST_CASE("landmark queries normalize case and plurals, then substring") {
  WorldState w(WorldConfig{}, {{1, "sofa"}, {2, "doorway"}, {3, "tv"}});
  w.mark_obstacle({1, 1}, 1);
  w.mark_obstacle({5, 5}, 2);
  w.mark_obstacle({7, 7}, 3);

  CHECK(w.query_landmark_cells("sofa") == CellSet{{1, 1}});
  CHECK(w.query_landmark_cells("Doorways") == CellSet{{5, 5}});
  CHECK(w.query_landmark_cells("television").empty());  // "tv" is not a substring of it
  CHECK(w.query_landmark_cells("the doorway to the kitchen") == CellSet{{5, 5}});
  CHECK(w.query_landmark_cells("SOFAS") == CellSet{{1, 1}});
}

TEST_CASE("landmark substring matching works in both directions") {
  WorldState w(WorldConfig{}, {{1, "bottle"}, {2, "dining table"}});
  w.mark_obstacle({1, 1}, 1);
  w.mark_obstacle({2, 2}, 2);
  CHECK(w.query_landmark_cells("a bottle of water") == CellSet{{1, 1}});  // label in landmark
  CHECK(w.query_landmark_cells("table") == CellSet{{2, 2}});              // landmark in label
}

TEST_CASE("exact label matches win over substring matches") {
  WorldState w(WorldConfig{}, {{1, "table"}, {2, "dining table"}});
  w.mark_obstacle({1, 1}, 1);
  w.mark_obstacle({2, 2}, 2);
  CHECK(w.query_landmark_cells("table") == CellSet{{1, 1}});
}

TEST_CASE("integration is idempotent and explored never shrinks") {
  std::mt19937 rng(7);
  for (int round = 0; round < 20; ++round) {
    auto scene = test_scenes::random_scene(rng, 20, 16);
    const Pose pose{scene.spawns[0].x, scene.spawns[0].y, 0.8, scene.spawns[0].heading};
    const auto obs = sim::observe(scene, pose, kPi / 2.0, 91, {});

    WorldState w(WorldConfig{}, scene.label_table);
    w.integrate_observation(obs);
    const CellSet ground1 = w.ground_cells();
    const CellSet obstacles1 = w.obstacle_cells();
    const CellSet explored1 = w.explored_cells();
    const std::size_t traj1 = w.traj().size();

    w.integrate_observation(obs);
    CHECK(w.ground_cells() == ground1);
    CHECK(w.obstacle_cells() == obstacles1);
    CHECK(w.explored_cells() == explored1);
    CHECK(w.traj().size() == traj1 + 1);

    // A second viewpoint only grows the explored set.
    Pose other = pose;
    other.heading = normalize_angle(pose.heading + kPi / 2.0);
    w.integrate_observation(sim::observe(scene, other, kPi / 2.0, 91, {}));
    for (const Cell& c : explored1) CHECK(w.explored_cells().count(c));
  }
}

TEST_CASE("navigable and obstacle sets stay disjoint") {
  std::mt19937 rng(11);
  for (int round = 0; round < 10; ++round) {
    auto scene = test_scenes::random_scene(rng, 24, 18);
    WorldState w(WorldConfig{}, scene.label_table);
    for (int tick = 0; tick < 12; ++tick) {
      Pose pose = scene.spawns[0];
      pose.z = 0.8;
      pose.heading = normalize_angle(tick * kPi / 6.0);
      w.integrate_observation(sim::observe(scene, pose, kPi / 2.0, 61, {}));
    }
    for (const Cell& c : w.extract_navigable()) {
      CHECK(!w.obstacle_cells().count(c));
      CHECK(w.explored_cells().count(c));
    }
  }
}

TEST_CASE("frontier soundness on random worlds") {
  std::mt19937 rng(13);
  for (int round = 0; round < 25; ++round) {
    WorldConfig cfg;
    cfg.inflate_radius = 0;
    WorldState w(cfg, {});
    std::uniform_int_distribution<int> coord(0, 49);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 600; ++k) {
      const Cell c{coord(rng), coord(rng)};
      if (u(rng) < 0.8)
        w.mark_ground(c);
      else
        w.mark_obstacle(c);
    }
    const CellSet nav = w.extract_navigable();
    const CellSet frontiers = w.detect_frontiers();
    static constexpr int kN4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    // Brute force: recheck the definition cell by cell.
    for (const Cell& c : nav) {
      bool open = false;
      for (const auto& d : kN4)
        if (!w.explored_cells().count(Cell{c.x + d[0], c.y + d[1]})) open = true;
      CHECK(frontiers.count(c) == (open ? 1 : 0));
    }
    for (const Cell& c : frontiers) CHECK(nav.count(c));
  }
}

TEST_CASE("rendered depth re-lifts into the source cell") {
  // Back-projection round trip: each hit point lands within
  // resolution/sqrt(2) of the hit cell's center.
  std::mt19937 rng(17);
  for (int round = 0; round < 10; ++round) {
    auto scene = test_scenes::random_scene(rng, 20, 20);
    Pose pose = scene.spawns[0];
    pose.z = 0.8;
    const auto obs = sim::observe(scene, pose, kPi / 2.0, 91, {});
    WorldState w(WorldConfig{}, scene.label_table);
    w.integrate_observation(obs);
    const GridFrame f = w.frame();
    for (const world::LabeledPoint& p : w.pcd()) {
      const Cell c = f.cell_of(p.x, p.y);
      double best = std::numeric_limits<double>::infinity();
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const Cell n{c.x + dx, c.y + dy};
          if (!w.obstacle_cells().count(n)) continue;
          const double ddx = f.center_x(n) - p.x;
          const double ddy = f.center_y(n) - p.y;
          best = std::min(best, std::hypot(ddx, ddy));
        }
      CHECK(best <= scene.resolution / std::sqrt(2.0) + 1e-12);
    }
  }
}
