#include "travnav/grounding.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <unordered_map>

#include <json.hpp>

namespace travnav {

bool label_matches(const std::string& object_label, const std::string& requested) {
  if (object_label == requested) return true;
  const auto space = object_label.find_last_of(' ');
  return space != std::string::npos && object_label.compare(space + 1, std::string::npos, requested) == 0;
}

std::optional<BoundingBox> silhouette_box(const ObjectSilhouette& silhouette, const CameraModel& cam) {
  if (silhouette.fills_image) return BoundingBox::from_edges(0.0, 0.0, cam.image_w, cam.image_h);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double umin = inf, vmin = inf, umax = -inf, vmax = -inf;
  bool visible = false;
  for (const auto& p : silhouette.samples) {
    const auto s = project_camera_frame(p, cam);
    if (!s) continue;
    visible = visible || inside_image(*s, cam);
    umin = std::min(umin, s->u);
    umax = std::max(umax, s->u);
    vmin = std::min(vmin, s->v);
    vmax = std::max(vmax, s->v);
  }
  if (!visible) return std::nullopt;
  umin = std::clamp(umin, 0.0, static_cast<double>(cam.image_w));
  umax = std::clamp(umax, 0.0, static_cast<double>(cam.image_w));
  vmin = std::clamp(vmin, 0.0, static_cast<double>(cam.image_h));
  vmax = std::clamp(vmax, 0.0, static_cast<double>(cam.image_h));
  if (!(umax > umin) || !(vmax > vmin)) return std::nullopt;
  return BoundingBox::from_edges(umin, vmin, umax, vmax);
}

namespace {

std::optional<BoundingBox> clip_to_image(const BoundingBox& b, const CameraModel& cam) {
  const double l = std::max(0.0, b.left());
  const double r = std::min(static_cast<double>(cam.image_w), b.right());
  const double t = std::max(0.0, b.top());
  const double bo = std::min(static_cast<double>(cam.image_h), b.bottom());
  if (!(r > l) || !(bo > t)) return std::nullopt;
  return BoundingBox::from_edges(l, t, r, bo);
}

}  // namespace

std::vector<LabeledBox> ground_synthetic(const SceneView& view, std::span<const std::string> labels,
                                         const CameraModel& cam, const GrounderNoise& noise) {
  if (labels.empty()) throw std::invalid_argument("ground_synthetic: no labels requested");
  cam.validate();

  std::mt19937_64 rng(noise.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<LabeledBox> out;
  for (const auto& object : view.objects) {
    for (const auto& label : labels) {
      if (!label_matches(object.label, label)) continue;
      auto tight = silhouette_box(object, cam);
      if (!tight) continue;

      BoundingBox box = *tight;
      if (noise.dropout_probability > 0.0 && unit(rng) < noise.dropout_probability) continue;
      if (noise.center_jitter_px > 0.0) {
        std::uniform_real_distribution<double> jitter(-noise.center_jitter_px, noise.center_jitter_px);
        box.cx += jitter(rng);
        box.cy += jitter(rng);
      }
      std::vector<BoundingBox> pieces;
      if (noise.split_probability > 0.0 && unit(rng) < noise.split_probability) {
        const double frac = 0.3 + 0.4 * unit(rng);
        if (box.w >= box.h) {
          const double cut = box.left() + frac * box.w;
          pieces.push_back(BoundingBox::from_edges(box.left(), box.top(), cut, box.bottom()));
          pieces.push_back(BoundingBox::from_edges(cut, box.top(), box.right(), box.bottom()));
        } else {
          const double cut = box.top() + frac * box.h;
          pieces.push_back(BoundingBox::from_edges(box.left(), box.top(), box.right(), cut));
          pieces.push_back(BoundingBox::from_edges(box.left(), cut, box.right(), box.bottom()));
        }
      } else {
        pieces.push_back(box);
      }
      for (const auto& piece : pieces) {
        if (auto clipped = clip_to_image(piece, cam)) out.push_back({label, *clipped});
      }
    }
  }
  return out;
}

std::vector<AttributedBox> attach_attributes(std::span<const LabeledBox> boxes,
                                             std::span<const LandmarkDirective> directives) {
  std::unordered_map<std::string, Attribute> by_label;
  for (const auto& d : directives) by_label.emplace(d.label, d.attribute);

  std::vector<AttributedBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) {
    const auto it = by_label.find(b.label);
    if (it == by_label.end()) throw UnknownLabelError("no directive for grounded label: " + b.label);
    out.push_back({b.box, b.label, it->second});
  }
  return out;
}

std::string detector_prompt(std::span<const std::string> labels) {
  std::string prompt;
  for (const auto& l : labels) {
    if (!prompt.empty()) prompt += ", ";
    prompt += l;
  }
  return prompt;
}

std::vector<LabeledBox> decode_detections(const std::string& payload, const EncodedImage& image) {
  std::vector<LabeledBox> out;
  try {
    const auto j = nlohmann::json::parse(payload);
    const bool normalized = j.value("normalized", true);
    const double sx = normalized ? static_cast<double>(image.width) : 1.0;
    const double sy = normalized ? static_cast<double>(image.height) : 1.0;
    if (normalized && (image.width <= 0 || image.height <= 0)) {
      throw RemoteDetectionError("normalized boxes need the image size", payload);
    }
    for (const auto& d : j.at("detections")) {
      const auto& b = d.at("box");
      if (!b.is_array() || b.size() != 4) throw RemoteDetectionError("box must hold [cx, cy, w, h]", payload);
      BoundingBox box{b[0].get<double>() * sx, b[1].get<double>() * sy, b[2].get<double>() * sx,
                      b[3].get<double>() * sy};
      if (!(box.w > 0.0) || !(box.h > 0.0)) throw RemoteDetectionError("box with non-positive size", payload);
      out.push_back({d.at("label").get<std::string>(), box});
    }
  } catch (const nlohmann::json::exception& e) {
    throw RemoteDetectionError(std::string("cannot decode detector response: ") + e.what(), payload);
  }
  return out;
}

std::vector<LabeledBox> remote_detect(const EncodedImage& image, std::span<const std::string> labels,
                                      DetectorClient& client) {
  if (labels.empty()) throw std::invalid_argument("remote_detect: no labels requested");
  return decode_detections(client.detect(image, detector_prompt(labels)), image);
}

}  // namespace travnav
