#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "travnav/geometry.hpp"
#include "travnav/segmentation.hpp"

namespace travnav {

inline constexpr std::uint8_t kFreeSpace = 0;
inline constexpr std::uint8_t kInscribedCost = 253;
inline constexpr std::uint8_t kLethalCost = 254;

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Grid geometry. Cell (0, 0) has its lower-left corner at the origin; rows
/// grow with +y.
struct GridSpec {
  double resolution = 0.05;
  double origin_x = 0.0;
  double origin_y = 0.0;
  int width = 1;
  int height = 1;

  void validate() const;
  std::size_t cell_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width + c.x; }
  Cell cell_of(std::size_t index) const {
    return {static_cast<int>(index % width), static_cast<int>(index / width)};
  }
  /// Unchecked floor conversion.
  Cell world_to_cell(double x, double y) const;
  std::optional<Cell> world_to_cell_checked(double x, double y) const;
  Eigen::Vector2d cell_center(Cell c) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cost assigned at a distance from the nearest lethal cell.
using InflationProfile = std::function<std::uint8_t(double distance, double radius)>;

/// 253 at distance 0, falling linearly to 1 at `radius`, 0 beyond.
std::uint8_t linear_inflation_profile(double distance, double radius);

/// Spreads cost around every lethal cell: cells within `radius` (center to
/// center) take max(current, profile(distance)); lethal cells stay lethal.
std::vector<std::uint8_t> inflate(const GridSpec& spec, std::span<const std::uint8_t> layer, double radius,
                                  const InflationProfile& profile = linear_inflation_profile);

/// Integer line traversal from `from` to `to`, both included. Along the major
/// axis every cell is visited once; the minor coordinate is the exact line
/// value rounded half up.
std::vector<Cell> trace_line(Cell from, Cell to);

class CostmapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Layered action-aware costmap. Layers:
///  - static: the given map (0 or 254)
///  - obstacle: LiDAR marks (254) and ray-trace clears (0)
///  - override: cells last classified traversable
/// master = inflate(max(static, obstacle)) with override cells forced to 0.
class Costmap {
 public:
  Costmap() = default;
  Costmap(GridSpec spec, std::vector<std::uint8_t> static_layer, double inflation_radius = 0.2);
  static Costmap empty(GridSpec spec, double inflation_radius = 0.2);

  const GridSpec& spec() const { return spec_; }
  double inflation_radius() const { return inflation_radius_; }

  std::span<const std::uint8_t> master() const { return master_; }
  std::span<const std::uint8_t> static_layer() const { return static_; }
  std::span<const std::uint8_t> obstacle_layer() const { return obstacle_; }
  std::span<const std::uint8_t> override_layer() const { return override_; }
  /// Inflated static+obstacle layer before overrides are applied.
  std::span<const std::uint8_t> inflated_layer() const { return inflated_; }

  std::uint8_t cost(Cell c) const { return master_[spec_.index(c)]; }
  bool overridden(Cell c) const { return override_[spec_.index(c)] != 0; }

  friend bool operator==(const Costmap& a, const Costmap& b) {
    return a.spec_ == b.spec_ && a.inflation_radius_ == b.inflation_radius_ && a.static_ == b.static_ &&
           a.obstacle_ == b.obstacle_ && a.override_ == b.override_ && a.master_ == b.master_;
  }

 private:
  friend Costmap apply_scan(const Costmap&, std::span<const std::size_t>, std::span<const std::size_t>,
                            const PointCloud&, const Pose2D&, const Eigen::Isometry3d&, bool);
  void rebuild_master();

  GridSpec spec_{};
  double inflation_radius_ = 0.2;
  std::vector<std::uint8_t> static_;
  std::vector<std::uint8_t> obstacle_;
  std::vector<std::uint8_t> override_;
  std::vector<std::uint8_t> inflated_;
  std::vector<std::uint8_t> master_;
};

/// Action-aware update. Every beam first clears the obstacle cells between
/// the sensor and its hit; then untraversable hits mark 254 and drop any
/// override, and cells hit only by traversable points become overridden.
/// Points landing outside the grid are discarded. Throws CostmapError when
/// the robot or the sensor is outside the grid.
Costmap update_costmap(const Costmap& prev, const SegmentedCloud& seg, const PointCloud& cloud,
                       const Pose2D& robot_pose, const Eigen::Isometry3d& lidar_to_world);

/// Update for a frame without boxes: the whole cloud marks obstacles, and
/// existing overrides are left in place.
Costmap update_costmap_fallback(const Costmap& prev, const PointCloud& cloud, const Pose2D& robot_pose,
                                const Eigen::Isometry3d& lidar_to_world);

}  // namespace travnav
