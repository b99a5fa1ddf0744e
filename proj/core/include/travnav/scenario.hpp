#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "travnav/costmap.hpp"
#include "travnav/geometry.hpp"
#include "travnav/grounding.hpp"
#include "travnav/simworld.hpp"

namespace travnav {

/// Everything needed to start a mission, loaded from a scenario JSON file.
struct Scenario {
  std::string name;
  World world;
  GridSpec grid;
  double inflation_radius = 0.2;
  std::vector<std::uint8_t> static_layer;
  RobotState start;
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  LidarSpec lidar;
  CameraModel camera;  // extrinsic derived from the two mounts
  MountPose camera_mount;
  GrounderNoise grounder_noise;
  std::uint64_t seed = 0;

  Costmap initial_costmap() const;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema:
/// {
///   "name": str,
///   "bounds": [min_x, min_y, max_x, max_y],
///   "grid": {"resolution": 0.05, "inflation_radius": 0.2},
///   "static_map": [{"label"?: str, "polygon": [[x, y], ...], "height_band"?: [lo, hi]}],
///   "objects": [{"label": str, "polygon": [[x, y], ...], "truly_traversable": bool,
///                "height_band": [lo, hi], "mapped"?: bool}],
///   "robot": {"start": [x, y, theta], "speed"?: 0.5},
///   "goal": [x, y],
///   "lidar": {"beam_count", "max_range", "min_range", "noise_sigma", "mount": {x, y, z, yaw}},
///   "camera": {"f", "sx", "sy", "k", "u0", "v0", "image_w", "image_h", "mount": {x, y, z, yaw, pitch}},
///   "grounder_noise"?: {"split_probability", "center_jitter_px", "dropout_probability"},
///   "seed": int
/// }
/// Static-map polygons become untraversable mapped objects.
Scenario scenario_from_json_text(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Names (file stems) of the *.json scenarios in a directory, sorted.
std::vector<std::string> list_scenarios(const std::string& directory);

}  // namespace travnav
