#include "instructnav/worldmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <set>
#include <stdexcept>

namespace instructnav::world {

namespace {

std::uint64_t point_key(const LabeledPoint& p) {
  auto mix = [](std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  };
  std::uint64_t bx, by, bz;
  std::memcpy(&bx, &p.x, 8);
  std::memcpy(&by, &p.y, 8);
  std::memcpy(&bz, &p.z, 8);
  std::uint64_t h = 0x811c9dc5;
  h = mix(h, bx);
  h = mix(h, by);
  h = mix(h, bz);
  h = mix(h, static_cast<std::uint64_t>(p.label));
  return h;
}

}  // namespace

std::string canonical_label(const std::string& raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i)
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
  if (out.size() > 1 && out.back() == 's') out.pop_back();
  return out;
}

WorldState::WorldState(WorldConfig config, std::map<int, std::string> label_table)
    : config_(config), label_table_(std::move(label_table)) {}

GridFrame WorldState::base_frame() const {
  GridFrame f;
  f.resolution = config_.resolution;
  f.origin_x = config_.origin_x;
  f.origin_y = config_.origin_y;
  return f;
}

void WorldState::touch_bounds(Cell c) {
  if (!has_bounds_) {
    min_x_ = max_x_ = c.x;
    min_y_ = max_y_ = c.y;
    has_bounds_ = true;
    return;
  }
  min_x_ = std::min(min_x_, c.x);
  max_x_ = std::max(max_x_, c.x);
  min_y_ = std::min(min_y_, c.y);
  max_y_ = std::max(max_y_, c.y);
}

void WorldState::mark_ground(Cell c) {
  touch_bounds(c);
  ground_.insert(c);
  explored_.insert(c);
}

void WorldState::mark_obstacle(Cell c, int label) {
  touch_bounds(c);
  obstacles_.insert(c);
  explored_.insert(c);
  if (label != 0) cells_by_label_[label].insert(c);
}

void WorldState::add_point(const LabeledPoint& p) {
  const std::uint64_t key = point_key(p);
  if (!pcd_keys_.insert(key).second) return;
  pcd_.push_back(p);
}

void WorldState::integrate_observation(const Observation& obs) {
  if (obs.width <= 0 || obs.depth.size() != static_cast<std::size_t>(obs.width) ||
      obs.semantic.size() != static_cast<std::size_t>(obs.width))
    throw std::invalid_argument("observation depth/semantic dimensions inconsistent");
  if (!std::isfinite(obs.pose.x) || !std::isfinite(obs.pose.y) || !std::isfinite(obs.pose.heading))
    throw std::invalid_argument("observation pose not finite");

  const GridFrame f = base_frame();
  for (int u = 0; u < obs.width; ++u) {
    const double d = obs.depth[static_cast<std::size_t>(u)];
    if (d <= 0.0) continue;  // invalid pixel
    if (obs.pose.z > config_.obstacle_height_max) continue;

    const double bearing = obs.pose.heading + pixel_bearing(u, obs.width, obs.hfov);
    const double dir_x = heading_dir_x(bearing);
    const double dir_y = heading_dir_y(bearing);
    const bool hit = d < config_.max_range;
    const double t_stop = hit ? d : config_.max_range;

    // Cells whose full extent lies before t_stop were seen through.
    RayWalker walker(f, obs.pose.x, obs.pose.y, dir_x, dir_y);
    Cell prev = walker.current().cell;
    while (walker.advance(t_stop)) {
      mark_ground(prev);
      prev = walker.current().cell;
      if (hit && walker.current().t_enter == d) break;
    }
    if (hit) {
      // `prev` is the cell whose boundary the reading landed on.
      LabeledPoint p{obs.pose.x + d * dir_x, obs.pose.y + d * dir_y, obs.pose.z,
                     obs.semantic[static_cast<std::size_t>(u)]};
      if (p.z <= config_.nav_height_max) {
        mark_ground(prev);
        if (p.label != 0) cells_by_label_[p.label].insert(prev);
      } else {
        mark_obstacle(prev, p.label);
      }
      add_point(p);
    }
  }
  traj_.push_back(obs.pose);
}

CellSet WorldState::extract_navigable() const {
  CellSet nav;
  nav.reserve(ground_.size());
  const int r = config_.inflate_radius;
  for (const Cell& c : ground_) {
    bool blocked = obstacles_.count(c) > 0;
    for (int dy = -r; dy <= r && !blocked; ++dy)
      for (int dx = -r; dx <= r && !blocked; ++dx)
        if (obstacles_.count(Cell{c.x + dx, c.y + dy})) blocked = true;
    if (!blocked) nav.insert(c);
  }
  return nav;
}

CellSet WorldState::detect_frontiers() const {
  static constexpr int kN4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  CellSet frontiers;
  for (const Cell& c : extract_navigable()) {
    for (const auto& d : kN4) {
      if (!explored_.count(Cell{c.x + d[0], c.y + d[1]})) {
        frontiers.insert(c);
        break;
      }
    }
  }
  return frontiers;
}

CellSet WorldState::query_landmark_cells(const std::string& landmark) const {
  const std::string query = canonical_label(landmark);
  if (query.empty()) return {};
  std::vector<int> exact, partial;
  for (const auto& [id, name] : label_table_) {
    const std::string canon = canonical_label(name);
    if (canon.empty()) continue;
    if (canon == query)
      exact.push_back(id);
    else if (canon.find(query) != std::string::npos || query.find(canon) != std::string::npos)
      partial.push_back(id);
  }
  const std::vector<int>& ids = exact.empty() ? partial : exact;
  CellSet out;
  for (int id : ids) {
    auto it = cells_by_label_.find(id);
    if (it != cells_by_label_.end()) out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

std::vector<std::string> WorldState::observed_labels() const {
  std::set<std::string> names;
  for (const auto& [id, cells] : cells_by_label_) {
    if (cells.empty()) continue;
    auto it = label_table_.find(id);
    if (it != label_table_.end()) names.insert(it->second);
  }
  return {names.begin(), names.end()};
}

GridFrame WorldState::frame() const {
  GridFrame f = base_frame();
  if (!has_bounds_) {
    f.width = 1;
    f.height = 1;
    return f;
  }
  f.i0 = min_x_;
  f.j0 = min_y_;
  f.width = max_x_ - min_x_ + 1;
  f.height = max_y_ - min_y_ + 1;
  return f;
}

}  // namespace instructnav::world
