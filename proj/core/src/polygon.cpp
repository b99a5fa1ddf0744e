#include "travnav/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace travnav {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double v = cross(b - a, c - a);
  return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
}

bool on_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
         p.y() <= std::max(a.y(), b.y());
}

}  // namespace

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                        const Eigen::Vector2d& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

std::optional<double> ray_segment_hit(const Eigen::Vector2d& origin, const Eigen::Vector2d& dir,
                                      const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d e = b - a;
  const double denom = cross(dir, e);
  if (std::abs(denom) < 1e-15) return std::nullopt;  // parallel; grazing hits are picked up by adjacent edges
  const Eigen::Vector2d ao = a - origin;
  const double t = cross(ao, e) / denom;
  const double u = cross(ao, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

void Polygon::validate() const {
  const std::size_t n = vertices.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw std::invalid_argument("polygon vertex is not finite");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(vertex(i), vertex(i + 1), vertex(j), vertex(j + 1))) {
        throw std::invalid_argument("polygon is not simple");
      }
    }
  }
}

bool Polygon::contains(const Eigen::Vector2d& p) const {
  const std::size_t n = vertices.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = vertices[i];
    const auto& b = vertices[j];
    if (orientation(a, b, p) == 0 && on_segment(a, b, p)) return true;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double Polygon::distance_to(const Eigen::Vector2d& p) const {
  if (contains(p)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices.size(); ++i) d = std::min(d, point_segment_distance(p, vertex(i), vertex(i + 1)));
  return d;
}

bool Polygon::intersects_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b) const {
  if (contains(a) || contains(b)) return true;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (segments_intersect(a, b, vertex(i), vertex(i + 1))) return true;
  }
  return false;
}

bool Polygon::intersects_rect(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) const {
  const Eigen::Vector2d corners[4] = {lo, {hi.x(), lo.y()}, hi, {lo.x(), hi.y()}};
  for (const auto& c : corners) {
    if (contains(c)) return true;
  }
  for (const auto& v : vertices) {
    if (v.x() >= lo.x() && v.x() <= hi.x() && v.y() >= lo.y() && v.y() <= hi.y()) return true;
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (int k = 0; k < 4; ++k) {
      if (segments_intersect(vertex(i), vertex(i + 1), corners[k], corners[(k + 1) % 4])) return true;
    }
  }
  return false;
}

}  // namespace travnav
