#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "travnav/geometry.hpp"
#include "travnav/grounding.hpp"

namespace travnav {

/// One LiDAR sweep in the sensor frame.
struct PointCloud {
  std::vector<LidarPoint> points;
  double stamp = 0.0;
};

/// Index partition of a source cloud; both lists ascending.
struct SegmentedCloud {
  std::vector<std::size_t> traversable;
  std::vector<std::size_t> untraversable;

  friend bool operator==(const SegmentedCloud&, const SegmentedCloud&) = default;
};

/// Per-point rule: traversable iff the point projects in front of the camera,
/// falls inside at least one box, and every box containing it is traversable.
bool point_is_traversable(const LidarPoint& p, std::span<const AttributedBox> boxes, const CameraModel& cam);

/// Splits the cloud by box membership. `workers` > 1 classifies contiguous
/// chunks on separate threads; the result does not depend on it.
SegmentedCloud segment(const PointCloud& cloud, std::span<const AttributedBox> boxes, const CameraModel& cam,
                       unsigned workers = 1);

}  // namespace travnav
