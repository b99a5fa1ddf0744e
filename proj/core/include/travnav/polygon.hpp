#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace travnav {

/// Simple polygon in the world plane, vertices in order (either winding).
struct Polygon {
  std::vector<Eigen::Vector2d> vertices;

  std::size_t size() const { return vertices.size(); }
  const Eigen::Vector2d& vertex(std::size_t i) const { return vertices[i % vertices.size()]; }

  /// Throws std::invalid_argument unless there are >= 3 vertices and no two
  /// non-adjacent edges intersect.
  void validate() const;
  /// Boundary counts as inside.
  bool contains(const Eigen::Vector2d& p) const;
  /// 0 inside, otherwise Euclidean distance to the boundary.
  double distance_to(const Eigen::Vector2d& p) const;
  /// True if the open segment a-b crosses the polygon's interior or boundary.
  bool intersects_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;
  /// Does the polygon meet the closed axis-aligned rectangle?
  bool intersects_rect(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) const;
};

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b);

/// Parameter t >= 0 along origin + t*dir where the ray meets segment a-b.
std::optional<double> ray_segment_hit(const Eigen::Vector2d& origin, const Eigen::Vector2d& dir,
                                      const Eigen::Vector2d& a, const Eigen::Vector2d& b);

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                        const Eigen::Vector2d& q2);

}  // namespace travnav
