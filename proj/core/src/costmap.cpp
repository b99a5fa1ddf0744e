#include "travnav/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace travnav {

void GridSpec::validate() const {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid: resolution must be positive");
  if (width < 1 || height < 1) throw std::invalid_argument("grid: width and height must be at least 1");
}

Cell GridSpec::world_to_cell(double x, double y) const {
  return {static_cast<int>(std::floor((x - origin_x) / resolution)),
          static_cast<int>(std::floor((y - origin_y) / resolution))};
}

std::optional<Cell> GridSpec::world_to_cell_checked(double x, double y) const {
  if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
  const double fx = std::floor((x - origin_x) / resolution);
  const double fy = std::floor((y - origin_y) / resolution);
  if (fx < 0 || fy < 0 || fx >= width || fy >= height) return std::nullopt;
  return Cell{static_cast<int>(fx), static_cast<int>(fy)};
}

Eigen::Vector2d GridSpec::cell_center(Cell c) const {
  return {origin_x + (c.x + 0.5) * resolution, origin_y + (c.y + 0.5) * resolution};
}

std::uint8_t linear_inflation_profile(double distance, double radius) {
  if (distance <= 0.0) return kInscribedCost;
  if (!(radius > 0.0) || distance > radius + 1e-9) return 0;
  const double c = 253.0 - 252.0 * std::min(distance / radius, 1.0);
  return static_cast<std::uint8_t>(std::lround(c));
}

std::vector<std::uint8_t> inflate(const GridSpec& spec, std::span<const std::uint8_t> layer, double radius,
                                  const InflationProfile& profile) {
  if (radius < 0.0) throw std::invalid_argument("inflate: radius must be non-negative");
  std::vector<std::uint8_t> out(layer.begin(), layer.end());
  if (radius == 0.0) return out;

  struct Offset {
    int dx, dy;
    std::uint8_t cost;
  };
  const int reach = static_cast<int>(std::floor(radius / spec.resolution + 1e-9));
  std::vector<Offset> kernel;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const double d = spec.resolution * std::sqrt(static_cast<double>(dx * dx + dy * dy));
      if (d > radius + 1e-9) continue;
      const auto c = std::min<std::uint8_t>(profile(d, radius), kInscribedCost);
      if (c > 0) kernel.push_back({dx, dy, c});
    }
  }

  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (layer[spec.index({x, y})] != kLethalCost) continue;
      for (const auto& k : kernel) {
        const Cell n{x + k.dx, y + k.dy};
        if (!spec.contains(n)) continue;
        auto& v = out[spec.index(n)];
        v = std::max(v, k.cost);
      }
    }
  }
  return out;
}

std::vector<Cell> trace_line(Cell from, Cell to) {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  const bool x_major = std::abs(dx) >= std::abs(dy);
  const int n = std::max(std::abs(dx), std::abs(dy));
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(n) + 1);
  if (n == 0) {
    cells.push_back(from);
    return cells;
  }
  const int major_step = (x_major ? dx : dy) > 0 ? 1 : -1;
  const long minor_delta = x_major ? dy : dx;
  // Invariant: 2*i*minor_delta + n == offset*2n + rem with 0 <= rem < 2n.
  const long two_n = 2L * n;
  long offset = 0;
  long rem = n;
  for (int i = 0; i <= n; ++i) {
    const int major = i * major_step;
    cells.push_back(x_major ? Cell{from.x + major, from.y + static_cast<int>(offset)}
                            : Cell{from.x + static_cast<int>(offset), from.y + major});
    rem += 2 * minor_delta;
    if (rem >= two_n) {
      rem -= two_n;
      ++offset;
    } else if (rem < 0) {
      rem += two_n;
      --offset;
    }
  }
  return cells;
}

Costmap::Costmap(GridSpec spec, std::vector<std::uint8_t> static_layer, double inflation_radius)
    : spec_(spec), inflation_radius_(inflation_radius), static_(std::move(static_layer)) {
  spec_.validate();
  if (inflation_radius_ < 0.0) throw std::invalid_argument("costmap: inflation radius must be non-negative");
  if (static_.size() != spec_.cell_count()) throw std::invalid_argument("costmap: static layer size mismatch");
  for (auto& v : static_) v = std::min(v, kLethalCost);
  obstacle_.assign(spec_.cell_count(), kFreeSpace);
  override_.assign(spec_.cell_count(), 0);
  rebuild_master();
}

Costmap Costmap::empty(GridSpec spec, double inflation_radius) {
  spec.validate();
  return Costmap(spec, std::vector<std::uint8_t>(spec.cell_count(), kFreeSpace), inflation_radius);
}

void Costmap::rebuild_master() {
  std::vector<std::uint8_t> combined(static_.size());
  std::transform(static_.begin(), static_.end(), obstacle_.begin(), combined.begin(),
                 [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
  inflated_ = inflate(spec_, combined, inflation_radius_);
  master_ = inflated_;
  for (std::size_t i = 0; i < master_.size(); ++i) {
    if (override_[i]) master_[i] = kFreeSpace;
  }
}

Costmap apply_scan(const Costmap& prev, std::span<const std::size_t> traversable,
                   std::span<const std::size_t> untraversable, const PointCloud& cloud, const Pose2D& robot_pose,
                   const Eigen::Isometry3d& lidar_to_world, bool keep_overrides) {
  const GridSpec& spec = prev.spec_;
  if (!spec.world_to_cell_checked(robot_pose.x, robot_pose.y)) {
    throw CostmapError("robot pose is outside the costmap");
  }
  const Eigen::Vector3d sensor = lidar_to_world.translation();
  const auto sensor_cell = spec.world_to_cell_checked(sensor.x(), sensor.y());
  if (!sensor_cell) throw CostmapError("sensor origin is outside the costmap");

  Costmap next = prev;
  if (traversable.empty() && untraversable.empty()) return next;

  enum : std::uint8_t { kHitTra = 1, kHitUntra = 2 };
  std::vector<std::uint8_t> hits(spec.cell_count(), 0);
  std::vector<Cell> hit_cells;
  auto collect = [&](std::span<const std::size_t> indices, std::uint8_t kind) {
    for (const auto i : indices) {
      if (i >= cloud.points.size()) throw std::out_of_range("segmentation index outside the cloud");
      const Eigen::Vector3d w = lidar_to_world * cloud.points[i].vec();
      const auto c = spec.world_to_cell_checked(w.x(), w.y());
      if (!c) continue;
      hit_cells.push_back(*c);
      hits[spec.index(*c)] |= kind;
    }
  };
  collect(traversable, kHitTra);
  collect(untraversable, kHitUntra);

  for (const auto& c : hit_cells) {
    const auto line = trace_line(*sensor_cell, c);
    for (std::size_t k = 0; k + 1 < line.size(); ++k) next.obstacle_[spec.index(line[k])] = kFreeSpace;
  }
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i] & kHitUntra) {
      next.obstacle_[i] = kLethalCost;
      if (!keep_overrides) next.override_[i] = 0;
    } else if (hits[i] & kHitTra) {
      next.obstacle_[i] = kFreeSpace;
      next.override_[i] = 1;
    }
  }
  next.rebuild_master();
  return next;
}

Costmap update_costmap(const Costmap& prev, const SegmentedCloud& seg, const PointCloud& cloud,
                       const Pose2D& robot_pose, const Eigen::Isometry3d& lidar_to_world) {
  return apply_scan(prev, seg.traversable, seg.untraversable, cloud, robot_pose, lidar_to_world, false);
}

Costmap update_costmap_fallback(const Costmap& prev, const PointCloud& cloud, const Pose2D& robot_pose,
                                const Eigen::Isometry3d& lidar_to_world) {
  std::vector<std::size_t> all(cloud.points.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return apply_scan(prev, {}, all, cloud, robot_pose, lidar_to_world, true);
}

}  // namespace travnav
