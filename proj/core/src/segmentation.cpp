#include "travnav/segmentation.hpp"

#include <algorithm>
#include <thread>

namespace travnav {

bool point_is_traversable(const LidarPoint& p, std::span<const AttributedBox> boxes, const CameraModel& cam) {
  const auto s = project(p, cam);
  if (!s) return false;
  bool covered = false;
  for (const auto& b : boxes) {
    if (!in_box(*s, b.box)) continue;
    if (b.attribute == Attribute::Untraversable) return false;
    covered = true;
  }
  return covered;
}

SegmentedCloud segment(const PointCloud& cloud, std::span<const AttributedBox> boxes, const CameraModel& cam,
                       unsigned workers) {
  cam.validate();
  const std::size_t n = cloud.points.size();
  std::vector<unsigned char> tra(n, 0);

  auto classify = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) tra[i] = point_is_traversable(cloud.points[i], boxes, cam) ? 1 : 0;
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1 || boxes.empty()) {
    if (!boxes.empty()) classify(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back(classify, begin, end);
    }
  }

  SegmentedCloud out;
  for (std::size_t i = 0; i < n; ++i) (tra[i] ? out.traversable : out.untraversable).push_back(i);
  return out;
}

}  // namespace travnav
