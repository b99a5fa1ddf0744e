#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "travnav/geometry.hpp"
#include "travnav/grounding.hpp"
#include "travnav/planner.hpp"
#include "travnav/polygon.hpp"
#include "travnav/segmentation.hpp"

namespace travnav {

/// A labeled prism in the world. `truly_traversable` is ground truth and is
/// never consulted by the sensors. `mapped` objects are part of the static map.
struct SceneObject {
  std::string label;
  Polygon footprint;
  bool truly_traversable = false;
  double z_min = 0.0;
  double z_max = 1.0;
  bool mapped = false;
};

struct WorldBounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 1.0;
  double max_y = 1.0;

  bool contains(const Eigen::Vector2d& p) const {
    return p.x() >= min_x && p.x() <= max_x && p.y() >= min_y && p.y() <= max_y;
  }
};

struct World {
  WorldBounds bounds;
  std::vector<SceneObject> objects;
};

/// Sensor placement in the robot frame (x forward, y left, z up).
struct MountPose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;
  double pitch = 0.0;

  Eigen::Isometry3d to_isometry() const;
};

struct LidarSpec {
  int beam_count = 360;
  double max_range = 10.0;
  double min_range = 0.0;
  double noise_sigma = 0.0;
  MountPose mount{0.0, 0.0, 0.3, 0.0, 0.0};
};

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double speed = 0.5;

  Pose2D pose() const { return {x, y, theta}; }
  Eigen::Vector2d position() const { return {x, y}; }
};

Eigen::Isometry3d robot_to_world(const RobotState& robot);
Eigen::Isometry3d lidar_to_world(const RobotState& robot, const LidarSpec& spec);

/// Extrinsic that maps LiDAR-frame points into the optical frame of a camera
/// mounted at `camera_mount`.
Eigen::Isometry3d lidar_to_camera(const MountPose& lidar_mount, const MountPose& camera_mount);

/// Smallest t > 0 with origin + t * dir inside the object's prism.
std::optional<double> ray_prism_hit(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, const SceneObject& obj);

/// One sweep of 2D ranges, returned in the LiDAR frame on its z = 0 plane.
/// Every object whose height band spans the scan plane blocks beams. Hits
/// closer than min_range or beyond max_range produce no point. Range noise is
/// drawn from `seed`.
PointCloud lidar_scan(const World& world, const RobotState& robot, const LidarSpec& spec, std::uint64_t seed);

/// Samples every object's prism outline (top and bottom rings plus vertical
/// edges) at <= 1 px image spacing and returns the objects with at least one
/// sample landing in the image, samples in the camera optical frame. An object
/// whose outline stays outside the image but whose prism meets the ray through
/// the principal point fills the frame and is returned flagged as such.
SceneView camera_view(const World& world, const RobotState& robot, const CameraModel& cam,
                      const MountPose& camera_mount);

struct StepResult {
  RobotState state;
  std::optional<std::string> collision;      // label of a truly untraversable object entered
  std::vector<std::string> unpermitted;      // traversable objects entered without permission
};

/// Moves the robot speed*dt toward the path point max(step, lookahead) of arc
/// length past its closest point, heading along the motion. Reports a
/// collision when the new position lies inside an object that is not truly
/// traversable.
StepResult step_robot(const World& world, const RobotState& robot, const Path& path, double dt,
                      const std::map<std::string, bool>& traversal_permission, double lookahead = 0.0);

/// Cells touched by mapped objects plus the outer ring of the grid are lethal.
std::vector<std::uint8_t> rasterize_static_layer(const World& world, const GridSpec& grid);

}  // namespace travnav
