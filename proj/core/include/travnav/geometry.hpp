#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace travnav {

/// Depth below which a camera-frame point is treated as behind the camera.
inline constexpr double kDepthEpsilon = 1e-6;

/// Planar pose in the world frame (meters, radians).
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// A LiDAR return in the sensor frame (z up).
struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
};

/// Continuous pixel coordinate plus the camera-frame depth it was divided by.
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Axis-aligned pixel box given by center and size.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return cx - w / 2.0; }
  double right() const { return cx + w / 2.0; }
  double top() const { return cy - h / 2.0; }
  double bottom() const { return cy + h / 2.0; }

  /// Smallest box whose edges reach at least the given bounds. Rounding in
  /// center/size form can pull an edge inward by an ulp, so edges are nudged
  /// outward until they cover.
  static BoundingBox from_edges(double left, double top, double right, double bottom);
};

/// Pinhole camera with LiDAR->camera extrinsic. Intrinsic matrix is
/// [[f*sx, k*sy, u0], [0, f*sy, v0], [0, 0, 1]].
struct CameraModel {
  double f = 1.0;
  double sx = 525.0;
  double sy = 525.0;
  double skew = 0.0;
  double u0 = 320.0;
  double v0 = 240.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();     // R_L^C
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();      // t_L^C
  int image_w = 640;
  int image_h = 480;

  Eigen::Matrix3d intrinsic() const;
  Eigen::Isometry3d extrinsic() const;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// 640x480, f*sx = f*sy = 525, principal point at the image center, camera
  /// co-located with the LiDAR and looking along its +x axis.
  static CameraModel default_synthetic();
};

/// Rotation taking a z-up body frame (x forward, y left) to the optical frame
/// (x right, y down, z forward).
Eigen::Matrix3d body_to_optical();

/// Applies only the intrinsic matrix to a point already in the camera frame.
std::optional<PixelCoord> project_camera_frame(const Eigen::Vector3d& p_cam, const CameraModel& cam);

/// LiDAR point to pixel. std::nullopt means the point is behind the camera
/// (depth <= kDepthEpsilon). The result is not clipped to the image.
std::optional<PixelCoord> project(const LidarPoint& p, const CameraModel& cam);

/// Closed-interval box containment.
bool in_box(const PixelCoord& s, const BoundingBox& box);

bool inside_image(const PixelCoord& s, const CameraModel& cam);

/// Camera calibration JSON: intrinsic fields plus row-major "R" (9 values) and "t" (3 values).
CameraModel camera_from_json_text(const std::string& text);
std::string camera_to_json_text(const CameraModel& cam);
CameraModel load_camera_calibration(const std::string& path);

}  // namespace travnav
