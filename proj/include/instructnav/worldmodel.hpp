#pragma once

#include <map>
#include <string>
#include <vector>

#include "instructnav/grid.hpp"

namespace instructnav::world {

/// Egocentric sensor frame: a single-row depth + semantic-label image.
/// depth[u] is the distance in meters along the pixel ray to the first
/// obstacle boundary (0 = invalid pixel); semantic[u] is the label id of
/// the hit cell (0 = unlabeled). The world is planar, so images have one
/// row by construction.
struct Observation {
  int width = 0;
  std::vector<double> depth;
  std::vector<int> semantic;
  Pose pose;
  double hfov = kPi / 2.0;
};

struct LabeledPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  int label = 0;
};

struct WorldConfig {
  double resolution = 0.25;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double nav_height_max = 0.2;
  double obstacle_height_max = 1.5;
  int inflate_radius = 1;   // cells, Chebyshev
  double max_range = 10.0;  // depth readings at/after this are free-space only
};

/// Incrementally built world representation: labeled point cloud,
/// observed-ground / obstacle / explored cell sets, and the walked
/// trajectory. Mutation happens only through integrate_observation and
/// the mark_* helpers; queries are pure and safe on a copied snapshot.
class WorldState {
 public:
  WorldState() = default;
  WorldState(WorldConfig config, std::map<int, std::string> label_table);

  const WorldConfig& config() const { return config_; }
  const std::map<int, std::string>& label_table() const { return label_table_; }
  const std::vector<LabeledPoint>& pcd() const { return pcd_; }
  const std::vector<Pose>& traj() const { return traj_; }
  const CellSet& ground_cells() const { return ground_; }
  const CellSet& obstacle_cells() const { return obstacles_; }
  const CellSet& explored_cells() const { return explored_; }

  /// Fuses one sensor frame into the world: every valid pixel ray is
  /// re-traced from the camera, cells fully crossed before the hit
  /// become observed ground, and the hit cell (when the reading is
  /// inside max_range) becomes an obstacle holding the back-projected
  /// labeled point. The pose is appended to the trajectory.
  void integrate_observation(const Observation& obs);

  void append_pose(const Pose& pose) { traj_.push_back(pose); }

  // Direct cell marking, for synthetic worlds in tests and tools.
  void mark_ground(Cell c);
  void mark_obstacle(Cell c, int label = 0);
  void mark_explored(Cell c) { touch_bounds(c); explored_.insert(c); }

  /// Ground cells minus obstacle cells minus everything within
  /// inflate_radius (Chebyshev) of an obstacle cell.
  CellSet extract_navigable() const;

  /// Navigable cells with at least one unexplored 4-neighbor.
  CellSet detect_frontiers() const;

  /// Ground-projected cells of all points whose canonical label matches
  /// the landmark: lowercase + trim + trailing-'s' singularization,
  /// exact match first, then substring containment in either direction.
  /// Empty result means "not observed yet".
  CellSet query_landmark_cells(const std::string& landmark) const;

  /// Label names (sorted, deduplicated) with at least one observed point.
  std::vector<std::string> observed_labels() const;

  /// Bounding frame of everything explored so far (at least 1x1).
  GridFrame frame() const;

  Cell cell_of(double x, double y) const { return base_frame().cell_of(x, y); }

 private:
  GridFrame base_frame() const;
  void touch_bounds(Cell c);
  void add_point(const LabeledPoint& p);

  WorldConfig config_;
  std::map<int, std::string> label_table_;
  std::vector<LabeledPoint> pcd_;
  std::unordered_set<std::uint64_t> pcd_keys_;  // exact-duplicate suppression
  std::vector<Pose> traj_;
  CellSet ground_;
  CellSet obstacles_;
  CellSet explored_;
  std::map<int, CellSet> cells_by_label_;
  bool has_bounds_ = false;
  int min_x_ = 0, min_y_ = 0, max_x_ = 0, max_y_ = 0;
};

/// Canonical form used for landmark/label matching.
std::string canonical_label(const std::string& raw);

}  // namespace instructnav::world
