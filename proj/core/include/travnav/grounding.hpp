#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "travnav/geometry.hpp"
#include "travnav/instruction.hpp"

namespace travnav {

struct LabeledBox {
  std::string label;
  BoundingBox box;
};

/// A pixel region whose LiDAR points inherit the landmark's attribute.
struct AttributedBox {
  BoundingBox box;
  std::string label;
  Attribute attribute = Attribute::Untraversable;
};

/// Detector imperfections injected into synthetic grounding. Zero noise gives
/// tight boxes.
struct GrounderNoise {
  double split_probability = 0.0;
  double center_jitter_px = 0.0;
  double dropout_probability = 0.0;
  std::uint64_t seed = 0;
};

/// Boundary samples of one object, expressed in the camera optical frame.
struct ObjectSilhouette {
  std::string label;
  std::vector<Eigen::Vector3d> samples;
  bool fills_image = false;  // no outline sample in the image, but the object covers the whole frame
};

/// What the camera sees this frame: the stand-in for the camera image.
struct SceneView {
  std::vector<ObjectSilhouette> objects;
};

/// True when `requested` names the object: equal to its label or to the
/// label's last word ("sign" names "warning sign").
bool label_matches(const std::string& object_label, const std::string& requested);

/// Pixel AABB of the silhouette samples in front of the camera, clipped to the
/// image; the whole image when the object fills the frame. Empty when no
/// sample lands inside the image and the object does not fill it.
std::optional<BoundingBox> silhouette_box(const ObjectSilhouette& silhouette, const CameraModel& cam);

/// Synthetic open-vocabulary detector over a simulated view. Each visible
/// object matching a requested label yields its tight box; noise then drops
/// it, jitters its center, or splits it in two along its long axis, and the
/// result is clipped to the image.
/// Throws std::invalid_argument if `labels` is empty or the camera is invalid.
std::vector<LabeledBox> ground_synthetic(const SceneView& view, std::span<const std::string> labels,
                                         const CameraModel& cam, const GrounderNoise& noise);

class UnknownLabelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Copies each directive's attribute onto the boxes grounded for its label.
std::vector<AttributedBox> attach_attributes(std::span<const LabeledBox> boxes,
                                             std::span<const LandmarkDirective> directives);

// --- remote detector ---------------------------------------------------------

struct EncodedImage {
  std::string bytes;
  std::string mime = "image/x-portable-pixmap";
  int width = 0;
  int height = 0;
};

class RemoteDetectionError : public std::runtime_error {
 public:
  RemoteDetectionError(const std::string& what, std::string raw_payload)
      : std::runtime_error(what), raw_payload_(std::move(raw_payload)) {}
  const std::string& raw_payload() const { return raw_payload_; }

 private:
  std::string raw_payload_;
};

/// Open-set detector backend. Returns the raw response body.
///
/// Response schema: {"normalized": bool (default true),
///                   "detections": [{"label": str, "box": [cx, cy, w, h]}]}
class DetectorClient {
 public:
  virtual ~DetectorClient() = default;
  virtual std::string detect(const EncodedImage& image, const std::string& prompt) = 0;
};

/// POSTs {"prompt", "image_b64", "mime", "width", "height"} as JSON.
/// Endpoint and key come from DETECTOR_ENDPOINT and DETECTOR_API_KEY.
class HttpDetectorClient : public DetectorClient {
 public:
  HttpDetectorClient(std::string endpoint, std::string api_key);
  static std::unique_ptr<HttpDetectorClient> from_environment();

  std::string detect(const EncodedImage& image, const std::string& prompt) override;

 private:
  std::string endpoint_;
  std::string api_key_;
};

/// "curtain, chair"
std::string detector_prompt(std::span<const std::string> labels);

/// Decodes a detector response into pixel boxes of `image`.
std::vector<LabeledBox> decode_detections(const std::string& payload, const EncodedImage& image);

/// Throws std::invalid_argument on an empty label list, RemoteDetectionError
/// on transport or decode failure.
std::vector<LabeledBox> remote_detect(const EncodedImage& image, std::span<const std::string> labels,
                                      DetectorClient& client);

std::string base64_encode(std::string_view bytes);

}  // namespace travnav
