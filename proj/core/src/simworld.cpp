#include "travnav/simworld.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "travnav/costmap.hpp"

namespace travnav {

Eigen::Isometry3d MountPose::to_isometry() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translation() = Eigen::Vector3d(x, y, z);
  t.linear() = (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()))
                   .toRotationMatrix();
  return t;
}

Eigen::Isometry3d robot_to_world(const RobotState& robot) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translation() = Eigen::Vector3d(robot.x, robot.y, 0.0);
  t.linear() = Eigen::AngleAxisd(robot.theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return t;
}

Eigen::Isometry3d lidar_to_world(const RobotState& robot, const LidarSpec& spec) {
  return robot_to_world(robot) * spec.mount.to_isometry();
}

namespace {

Eigen::Isometry3d optical_from_body() {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = body_to_optical();
  return t;
}

}  // namespace

Eigen::Isometry3d lidar_to_camera(const MountPose& lidar_mount, const MountPose& camera_mount) {
  return optical_from_body() * camera_mount.to_isometry().inverse() * lidar_mount.to_isometry();
}

PointCloud lidar_scan(const World& world, const RobotState& robot, const LidarSpec& spec, std::uint64_t seed) {
  PointCloud cloud;
  if (spec.beam_count < 1 || !(spec.max_range > 0.0)) return cloud;

  const Eigen::Isometry3d sensor = lidar_to_world(robot, spec);
  const Eigen::Vector2d origin = sensor.translation().head<2>();
  const double scan_z = sensor.translation().z();
  const Eigen::Vector3d forward = sensor.linear().col(0);
  const double yaw = std::atan2(forward.y(), forward.x());

  std::vector<std::pair<Eigen::Vector2d, Eigen::Vector2d>> edges;
  for (const auto& obj : world.objects) {
    if (scan_z < obj.z_min || scan_z > obj.z_max) continue;
    for (std::size_t i = 0; i < obj.footprint.size(); ++i) {
      edges.emplace_back(obj.footprint.vertex(i), obj.footprint.vertex(i + 1));
    }
  }
  const auto& b = world.bounds;
  const Eigen::Vector2d c00(b.min_x, b.min_y), c10(b.max_x, b.min_y), c11(b.max_x, b.max_y), c01(b.min_x, b.max_y);
  edges.emplace_back(c00, c10);
  edges.emplace_back(c10, c11);
  edges.emplace_back(c11, c01);
  edges.emplace_back(c01, c00);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);

  cloud.points.reserve(static_cast<std::size_t>(spec.beam_count));
  for (int i = 0; i < spec.beam_count; ++i) {
    const double a = 2.0 * std::numbers::pi * i / spec.beam_count;
    const Eigen::Vector2d dir(std::cos(yaw + a), std::sin(yaw + a));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [p, q] : edges) {
      if (auto t = ray_segment_hit(origin, dir, p, q); t && *t < best) best = *t;
    }
    double r = best;
    if (spec.noise_sigma > 0.0) r = std::max(0.0, r + noise(rng));
    if (!(best <= spec.max_range) || best < spec.min_range) continue;
    cloud.points.push_back({r * std::cos(a), r * std::sin(a), 0.0});
  }
  return cloud;
}

namespace {

bool same_outside_side(const PixelCoord& a, const PixelCoord& b, const CameraModel& cam) {
  return (a.u < 0 && b.u < 0) || (a.v < 0 && b.v < 0) || (a.u > cam.image_w && b.u > cam.image_w) ||
         (a.v > cam.image_h && b.v > cam.image_h);
}

// Appends samples of a-b (excluding a) so consecutive in-front samples are at
// most one pixel apart wherever the segment can reach the image.
void sample_segment(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const CameraModel& cam, int depth,
                    std::vector<Eigen::Vector3d>& out) {
  if (a.z() <= kDepthEpsilon && b.z() <= kDepthEpsilon) {
    out.push_back(b);
    return;
  }
  const auto pa = project_camera_frame(a, cam);
  const auto pb = project_camera_frame(b, cam);
  bool done = depth >= 48 || (a - b).norm() < 1e-9;
  if (!done && pa && pb) {
    const double span = std::max(std::abs(pa->u - pb->u), std::abs(pa->v - pb->v));
    done = span <= 1.0 || same_outside_side(*pa, *pb, cam);
  }
  if (done) {
    out.push_back(b);
    return;
  }
  const Eigen::Vector3d mid = 0.5 * (a + b);
  sample_segment(a, mid, cam, depth + 1, out);
  sample_segment(mid, b, cam, depth + 1, out);
}

}  // namespace

std::optional<double> ray_prism_hit(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, const SceneObject& obj) {
  // Membership is constant between breakpoints, so testing one point per
  // interval decides it.
  std::vector<double> ts{0.0};
  const Eigen::Vector2d o2 = origin.head<2>(), d2 = dir.head<2>();
  for (std::size_t i = 0; i < obj.footprint.size(); ++i) {
    if (auto t = ray_segment_hit(o2, d2, obj.footprint.vertex(i), obj.footprint.vertex(i + 1))) ts.push_back(*t);
  }
  if (std::abs(dir.z()) > 1e-15) {
    for (double z : {obj.z_min, obj.z_max}) {
      const double t = (z - origin.z()) / dir.z();
      if (t > 0.0) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.push_back(2.0 * ts.back() + 1.0);
  const auto inside = [&](double t) {
    const Eigen::Vector3d p = origin + t * dir;
    return p.z() >= obj.z_min && p.z() <= obj.z_max && obj.footprint.contains(p.head<2>());
  };
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] <= ts[i]) continue;
    if (inside(0.5 * (ts[i] + ts[i + 1]))) return ts[i];
  }
  return std::nullopt;
}

SceneView camera_view(const World& world, const RobotState& robot, const CameraModel& cam,
                      const MountPose& camera_mount) {
  cam.validate();
  const Eigen::Isometry3d world_to_cam =
      optical_from_body() * camera_mount.to_isometry().inverse() * robot_to_world(robot).inverse();

  SceneView view;
  for (const auto& obj : world.objects) {
    ObjectSilhouette sil{obj.label, {}};
    auto add_edge = [&](const Eigen::Vector3d& p, const Eigen::Vector3d& q) {
      const Eigen::Vector3d a = world_to_cam * p;
      const Eigen::Vector3d b = world_to_cam * q;
      sil.samples.push_back(a);
      sample_segment(a, b, cam, 0, sil.samples);
    };
    for (std::size_t i = 0; i < obj.footprint.size(); ++i) {
      const auto& v = obj.footprint.vertex(i);
      const auto& w = obj.footprint.vertex(i + 1);
      add_edge({v.x(), v.y(), obj.z_min}, {w.x(), w.y(), obj.z_min});
      add_edge({v.x(), v.y(), obj.z_max}, {w.x(), w.y(), obj.z_max});
      add_edge({v.x(), v.y(), obj.z_min}, {v.x(), v.y(), obj.z_max});
    }
    const bool visible = std::any_of(sil.samples.begin(), sil.samples.end(), [&](const Eigen::Vector3d& p) {
      const auto s = project_camera_frame(p, cam);
      return s && inside_image(*s, cam);
    });
    if (!visible) {
      // The frame is then wholly inside or wholly outside the object's image.
      const Eigen::Isometry3d cam_to_world = world_to_cam.inverse();
      sil.fills_image = ray_prism_hit(cam_to_world.translation(), cam_to_world.linear().col(2), obj).has_value();
    }
    if (visible || sil.fills_image) view.objects.push_back(std::move(sil));
  }
  return view;
}

StepResult step_robot(const World& world, const RobotState& robot, const Path& path, double dt,
                      const std::map<std::string, bool>& traversal_permission, double lookahead) {
  if (path.waypoints.empty()) throw std::invalid_argument("step_robot: empty path");
  StepResult result{robot, std::nullopt, {}};
  const double step = robot.speed * dt;
  if (!(step > 0.0)) return result;

  const Eigen::Vector2d pos = robot.position();
  const auto& wp = path.waypoints;

  // Arc-length position of the closest point on the polyline.
  double best_d = (wp.front() - pos).norm();
  double best_s = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const Eigen::Vector2d seg = wp[i + 1] - wp[i];
    const double len = seg.norm();
    const double t = len > 0.0 ? std::clamp((pos - wp[i]).dot(seg) / (len * len), 0.0, 1.0) : 0.0;
    const double d = (wp[i] + t * seg - pos).norm();
    if (d < best_d - 1e-12) {
      best_d = d;
      best_s = s + t * len;
    }
    s += len;
  }
  const double total = s;

  double target_s = std::min(best_s + std::max(step, lookahead), total);
  Eigen::Vector2d target = wp.back();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const double len = (wp[i + 1] - wp[i]).norm();
    if (acc + len >= target_s && len > 0.0) {
      target = wp[i] + (target_s - acc) / len * (wp[i + 1] - wp[i]);
      break;
    }
    acc += len;
  }

  const Eigen::Vector2d delta = target - pos;
  const double dist = delta.norm();
  if (dist > 1e-12) {
    const Eigen::Vector2d next = pos + std::min(step, dist) / dist * delta;
    result.state.x = next.x();
    result.state.y = next.y();
    result.state.theta = std::atan2(delta.y(), delta.x());
  }

  const Eigen::Vector2d p = result.state.position();
  for (const auto& obj : world.objects) {
    if (!obj.footprint.contains(p)) continue;
    if (!obj.truly_traversable) {
      if (!result.collision) result.collision = obj.label;
      continue;
    }
    const auto it = traversal_permission.find(obj.label);
    if (it == traversal_permission.end() || !it->second) result.unpermitted.push_back(obj.label);
  }
  if (!result.collision && !world.bounds.contains(p)) result.collision = "world boundary";
  return result;
}

std::vector<std::uint8_t> rasterize_static_layer(const World& world, const GridSpec& grid) {
  grid.validate();
  std::vector<std::uint8_t> layer(grid.cell_count(), kFreeSpace);
  for (int x = 0; x < grid.width; ++x) {
    layer[grid.index({x, 0})] = kLethalCost;
    layer[grid.index({x, grid.height - 1})] = kLethalCost;
  }
  for (int y = 0; y < grid.height; ++y) {
    layer[grid.index({0, y})] = kLethalCost;
    layer[grid.index({grid.width - 1, y})] = kLethalCost;
  }

  // Cell squares shrink slightly so a polygon edge lying exactly on a cell
  // border does not mark the neighbor.
  const double eps = 1e-7;
  for (const auto& obj : world.objects) {
    if (!obj.mapped) continue;
    Eigen::Vector2d lo = obj.footprint.vertices.front(), hi = lo;
    for (const auto& v : obj.footprint.vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const Cell c0 = grid.world_to_cell(lo.x(), lo.y());
    const Cell c1 = grid.world_to_cell(hi.x(), hi.y());
    for (int y = std::max(0, c0.y); y <= std::min(grid.height - 1, c1.y); ++y) {
      for (int x = std::max(0, c0.x); x <= std::min(grid.width - 1, c1.x); ++x) {
        const Eigen::Vector2d cell_lo(grid.origin_x + x * grid.resolution + eps,
                                      grid.origin_y + y * grid.resolution + eps);
        const Eigen::Vector2d cell_hi(cell_lo.x() + grid.resolution - 2 * eps, cell_lo.y() + grid.resolution - 2 * eps);
        if (obj.footprint.intersects_rect(cell_lo, cell_hi)) layer[grid.index({x, y})] = kLethalCost;
      }
    }
  }
  return layer;
}

}  // namespace travnav
