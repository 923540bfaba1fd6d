#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_set>
#include <vector>

namespace instructnav {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Normalize an angle to [0, 2*pi).
inline double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Wrap an angle to (-pi, pi].
inline double wrap_to_pi(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Robot pose. Heading is in [0, 2*pi), 0 along the scene +x axis,
/// increasing clockwise when viewed from above (+z up, +y north).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double heading = 0.0;
};

/// Unit direction of a heading in the ground plane (clockwise-positive).
inline double heading_dir_x(double heading) { return std::cos(heading); }
inline double heading_dir_y(double heading) { return -std::sin(heading); }

/// Clockwise angle from +x to the vector (dx, dy), in (-pi, pi].
inline double bearing_of(double dx, double dy) { return wrap_to_pi(std::atan2(-dy, dx)); }

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
  bool operator!=(const Cell& o) const { return !(*this == o); }
  bool operator<(const Cell& o) const { return x != o.x ? x < o.x : y < o.y; }
};

struct CellHash {
  std::size_t operator()(const Cell& c) const {
    std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                      static_cast<std::uint32_t>(c.y);
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    return static_cast<std::size_t>(k);
  }
};

using CellSet = std::unordered_set<Cell, CellHash>;

/// The grid frame shared by world and value maps: a window of cells
/// [i0, i0+width) x [j0, j0+height) over a lattice with `resolution`
/// meters per cell anchored at world point (origin_x, origin_y).
struct GridFrame {
  int i0 = 0;
  int j0 = 0;
  int width = 0;
  int height = 0;
  double resolution = 0.25;
  double origin_x = 0.0;
  double origin_y = 0.0;

  bool operator==(const GridFrame& o) const {
    return i0 == o.i0 && j0 == o.j0 && width == o.width && height == o.height &&
           resolution == o.resolution && origin_x == o.origin_x && origin_y == o.origin_y;
  }
  bool operator!=(const GridFrame& o) const { return !(*this == o); }

  bool contains(Cell c) const {
    return c.x >= i0 && c.x < i0 + width && c.y >= j0 && c.y < j0 + height;
  }
  std::size_t index_of(Cell c) const {
    return static_cast<std::size_t>(c.y - j0) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(c.x - i0);
  }
  Cell cell_at(std::size_t idx) const {
    return Cell{i0 + static_cast<int>(idx % static_cast<std::size_t>(width)),
                j0 + static_cast<int>(idx / static_cast<std::size_t>(width))};
  }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  Cell cell_of(double x, double y) const {
    return Cell{static_cast<int>(std::floor((x - origin_x) / resolution)),
                static_cast<int>(std::floor((y - origin_y) / resolution))};
  }
  double center_x(Cell c) const { return origin_x + (c.x + 0.5) * resolution; }
  double center_y(Cell c) const { return origin_y + (c.y + 0.5) * resolution; }
};

inline double cell_center_distance(const GridFrame& f, Cell a, Cell b) {
  const double dx = f.center_x(a) - f.center_x(b);
  const double dy = f.center_y(a) - f.center_y(b);
  return std::hypot(dx, dy);
}

/// True when the cell center lies in the 90-degree sector whose center
/// bearing is `heading + center_offset`, i.e. relative bearing in
/// (-45, +45] degrees. The cell containing the pose itself never counts.
inline bool in_sector(const GridFrame& f, Cell c, const Pose& pose, double center_offset) {
  const double dx = f.center_x(c) - pose.x;
  const double dy = f.center_y(c) - pose.y;
  if (dx == 0.0 && dy == 0.0) return false;
  const double rel = wrap_to_pi(bearing_of(dx, dy) - (pose.heading + center_offset));
  return rel > -kPi / 4.0 && rel <= kPi / 4.0;
}

/// One step of a grid ray walk: the cell entered and the ray parameter
/// (distance from the origin) at which its boundary was crossed.
struct RayCell {
  Cell cell;
  double t_enter = 0.0;
};

/// Walks the cells crossed by the ray p0 + t*dir for t in [0, t_max],
/// starting with the cell containing p0 at t_enter = 0. Boundary
/// crossings are computed by direct division so that identical inputs
/// give bit-identical t values everywhere this is used.
class RayWalker {
 public:
  RayWalker(const GridFrame& f, double px, double py, double dir_x, double dir_y)
      : f_(f), px_(px), py_(py), dx_(dir_x), dy_(dir_y) {
    cur_ = f.cell_of(px, py);
    step_x_ = dx_ > 0.0 ? 1 : (dx_ < 0.0 ? -1 : 0);
    step_y_ = dy_ > 0.0 ? 1 : (dy_ < 0.0 ? -1 : 0);
    kx_ = dx_ > 0.0 ? cur_.x + 1 : cur_.x;
    ky_ = dy_ > 0.0 ? cur_.y + 1 : cur_.y;
    t_ = 0.0;
  }

  RayCell current() const { return RayCell{cur_, t_}; }

  /// Advances to the next cell along the ray. Returns false when the
  /// next boundary lies beyond t_max.
  bool advance(double t_max) {
    const double tx = step_x_ != 0
                          ? (f_.origin_x + kx_ * f_.resolution - px_) / dx_
                          : std::numeric_limits<double>::infinity();
    const double ty = step_y_ != 0
                          ? (f_.origin_y + ky_ * f_.resolution - py_) / dy_
                          : std::numeric_limits<double>::infinity();
    double t_next;
    if (tx < ty) {
      t_next = tx;
      if (t_next > t_max) return false;
      cur_.x += step_x_;
      kx_ += step_x_;
    } else if (ty < tx) {
      t_next = ty;
      if (t_next > t_max) return false;
      cur_.y += step_y_;
      ky_ += step_y_;
    } else {
      if (!std::isfinite(tx)) return false;
      t_next = tx;  // exact corner: step both axes
      if (t_next > t_max) return false;
      cur_.x += step_x_;
      cur_.y += step_y_;
      kx_ += step_x_;
      ky_ += step_y_;
    }
    t_ = t_next;
    return true;
  }

 private:
  GridFrame f_;
  double px_, py_, dx_, dy_;
  Cell cur_;
  int step_x_, step_y_;
  long long kx_, ky_;
  double t_ = 0.0;
};

/// Bearing of the center of pixel u in a W-pixel single-row pinhole
/// image with horizontal field of view `hfov`, relative to the optical
/// axis, clockwise-positive. Shared by the renderer and the
/// back-projection so the two are exactly inverse.
inline double pixel_bearing(int u, int width, double hfov) {
  const double f = (width / 2.0) / std::tan(hfov / 2.0);
  return std::atan(((u + 0.5) - width / 2.0) / f);
}

}  // namespace instructnav
