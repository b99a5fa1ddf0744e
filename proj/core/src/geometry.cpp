#include "travnav/geometry.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace travnav {

BoundingBox BoundingBox::from_edges(double left, double top, double right, double bottom) {
  BoundingBox box{(left + right) / 2.0, (top + bottom) / 2.0, right - left, bottom - top};
  const auto widen = [](double& size, double center, auto covered) {
    double step = std::abs(std::nextafter(std::abs(center) + size, std::numeric_limits<double>::infinity()) - (std::abs(center) + size));
    for (int i = 0; i < 64 && !covered(); ++i) {
      size += step;
      step *= 2.0;
    }
  };
  widen(box.w, box.cx, [&] { return box.left() <= left && box.right() >= right; });
  widen(box.h, box.cy, [&] { return box.top() <= top && box.bottom() >= bottom; });
  return box;
}

Eigen::Matrix3d CameraModel::intrinsic() const {
  Eigen::Matrix3d k;
  k << f * sx, skew * sy, u0,
       0.0, f * sy, v0,
       0.0, 0.0, 1.0;
  return k;
}

Eigen::Isometry3d CameraModel::extrinsic() const {
  Eigen::Isometry3d e = Eigen::Isometry3d::Identity();
  e.linear() = rotation;
  e.translation() = translation;
  return e;
}

void CameraModel::validate() const {
  if (!(f * sx > 0.0) || !(f * sy > 0.0)) {
    throw std::invalid_argument("camera: f*sx and f*sy must be positive");
  }
  if (image_w <= 0 || image_h <= 0) {
    throw std::invalid_argument("camera: image size must be positive");
  }
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw std::invalid_argument("camera: extrinsic must be finite");
  }
  const double ortho_err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("camera: rotation must be orthonormal with determinant +1");
  }
}

Eigen::Matrix3d body_to_optical() {
  Eigen::Matrix3d r;
  r << 0.0, -1.0, 0.0,
       0.0, 0.0, -1.0,
       1.0, 0.0, 0.0;
  return r;
}

CameraModel CameraModel::default_synthetic() {
  CameraModel cam;
  cam.rotation = body_to_optical();
  return cam;
}

std::optional<PixelCoord> project_camera_frame(const Eigen::Vector3d& p_cam, const CameraModel& cam) {
  const Eigen::Vector3d h = cam.intrinsic() * p_cam;
  if (!(h.z() > kDepthEpsilon)) {
    return std::nullopt;
  }
  return PixelCoord{h.x() / h.z(), h.y() / h.z(), h.z()};
}

std::optional<PixelCoord> project(const LidarPoint& p, const CameraModel& cam) {
  return project_camera_frame(cam.rotation * p.vec() + cam.translation, cam);
}

bool in_box(const PixelCoord& s, const BoundingBox& box) {
  return box.left() <= s.u && s.u <= box.right() && box.top() <= s.v && s.v <= box.bottom();
}

bool inside_image(const PixelCoord& s, const CameraModel& cam) {
  return s.u >= 0.0 && s.u <= cam.image_w && s.v >= 0.0 && s.v <= cam.image_h;
}

namespace {

using nlohmann::json;

CameraModel camera_from_json(const json& j) {
  for (const char* key : {"f", "sx", "sy", "u0", "v0", "image_w", "image_h"}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("camera: missing field '") + key + "'");
  }
  CameraModel cam;
  cam.f = j.value("f", cam.f);
  cam.sx = j.value("sx", cam.sx);
  cam.sy = j.value("sy", cam.sy);
  cam.skew = j.value("k", cam.skew);
  cam.u0 = j.value("u0", cam.u0);
  cam.v0 = j.value("v0", cam.v0);
  cam.image_w = j.value("image_w", cam.image_w);
  cam.image_h = j.value("image_h", cam.image_h);
  if (j.contains("R")) {
    const auto& r = j.at("R");
    if (!r.is_array() || r.size() != 9) throw std::invalid_argument("camera: R must hold 9 values");
    for (int i = 0; i < 9; ++i) cam.rotation(i / 3, i % 3) = r.at(i).get<double>();
  }
  if (j.contains("t")) {
    const auto& t = j.at("t");
    if (!t.is_array() || t.size() != 3) throw std::invalid_argument("camera: t must hold 3 values");
    for (int i = 0; i < 3; ++i) cam.translation(i) = t.at(i).get<double>();
  }
  cam.validate();
  return cam;
}

}  // namespace

CameraModel camera_from_json_text(const std::string& text) {
  try {
    return camera_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("camera calibration: ") + e.what());
  }
}

std::string camera_to_json_text(const CameraModel& cam) {
  json j;
  j["f"] = cam.f;
  j["sx"] = cam.sx;
  j["sy"] = cam.sy;
  j["k"] = cam.skew;
  j["u0"] = cam.u0;
  j["v0"] = cam.v0;
  j["image_w"] = cam.image_w;
  j["image_h"] = cam.image_h;
  json r = json::array();
  for (int i = 0; i < 9; ++i) r.push_back(cam.rotation(i / 3, i % 3));
  j["R"] = r;
  j["t"] = {cam.translation.x(), cam.translation.y(), cam.translation.z()};
  return j.dump(2);
}

CameraModel load_camera_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return camera_from_json_text(ss.str());
}

}  // namespace travnav
