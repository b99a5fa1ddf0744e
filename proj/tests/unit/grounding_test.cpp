#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "random_inputs.hpp"
#include "travnav/grounding.hpp"
#include "travnav/scenario.hpp"
#include "travnav/simworld.hpp"

using namespace travnav;

namespace {

Eigen::Isometry3d world_to_optical(const Scenario& sc, const RobotState& robot) {
  Eigen::Isometry3d optical = Eigen::Isometry3d::Identity();
  optical.linear() = body_to_optical();
  return optical * sc.camera_mount.to_isometry().inverse() * robot_to_world(robot).inverse();
}

std::vector<Eigen::Vector3d> prism_edges(const SceneObject& obj) {
  std::vector<Eigen::Vector3d> e;
  for (std::size_t i = 0; i < obj.footprint.size(); ++i) {
    const auto& v = obj.footprint.vertex(i);
    const auto& w = obj.footprint.vertex(i + 1);
    for (double z : {obj.z_min, obj.z_max}) {
      e.emplace_back(v.x(), v.y(), z);
      e.emplace_back(w.x(), w.y(), z);
    }
    e.emplace_back(v.x(), v.y(), obj.z_min);
    e.emplace_back(v.x(), v.y(), obj.z_max);
  }
  return e;
}

}  // namespace

TEST(LabelMatch, ExactOrLastWord) {
  EXPECT_TRUE(label_matches("curtain", "curtain"));
  EXPECT_TRUE(label_matches("warning sign", "sign"));
  EXPECT_TRUE(label_matches("orange wooden wall", "wall"));
  EXPECT_TRUE(label_matches("orange wooden wall", "orange wooden wall"));
  EXPECT_FALSE(label_matches("wall", "orange wooden wall"));
  EXPECT_FALSE(label_matches("curtain", "curtains"));
  EXPECT_FALSE(label_matches("signpost", "sign"));
}

TEST(Silhouette, MatchesDenseSamplingOracle) {
  const Scenario sc = load_scenario(testing_support::scenario_path("curtain_room"));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(0.3, 5.7), uy(0.3, 3.7), ut(-3.14159, 3.14159);
  int compared = 0, filled = 0;
  for (int trial = 0; trial < 60; ++trial) {
    RobotState robot = sc.start;
    robot.x = ux(rng);
    robot.y = uy(rng);
    robot.theta = ut(rng);
    const SceneView view = camera_view(sc.world, robot, sc.camera, sc.camera_mount);
    const auto T = world_to_optical(sc, robot);
    for (const auto& obj : sc.world.objects) {
      auto ref = oracle::dense_silhouette_box(prism_edges(obj), T, sc.camera, 0.1);
      if (!ref && oracle::principal_ray_meets_prism(T, obj.footprint.vertices, obj.z_min, obj.z_max)) {
        ref = BoundingBox::from_edges(0, 0, sc.camera.image_w, sc.camera.image_h);
        ++filled;
      }
      const auto it = std::find_if(view.objects.begin(), view.objects.end(),
                                   [&](const ObjectSilhouette& s) { return s.label == obj.label; });
      // Labels are unique in this scenario except the partition pieces.
      if (obj.label == "partition") continue;
      if (!ref) {
        EXPECT_TRUE(it == view.objects.end() || !silhouette_box(*it, sc.camera)) << obj.label;
        continue;
      }
      ASSERT_NE(it, view.objects.end()) << obj.label << " trial " << trial;
      const auto got = silhouette_box(*it, sc.camera);
      ASSERT_TRUE(got);
      EXPECT_NEAR(got->left(), ref->left(), 0.1);
      EXPECT_NEAR(got->right(), ref->right(), 0.1);
      EXPECT_NEAR(got->top(), ref->top(), 0.1);
      EXPECT_NEAR(got->bottom(), ref->bottom(), 0.1);
      ++compared;
    }
  }
  EXPECT_GT(compared, 30);
  RecordProperty("filled", filled);
}

TEST(Silhouette, ObjectFillingTheFrameGetsTheWholeImage) {
  const Scenario sc = load_scenario(testing_support::scenario_path("curtain_room"));
  RobotState robot = sc.start;
  robot.x = 2.65;  // camera 0.31 m short of the curtain, outline beyond every image edge
  robot.y = 2.0;
  robot.theta = 0.0;
  const SceneView view = camera_view(sc.world, robot, sc.camera, sc.camera_mount);
  const auto it = std::find_if(view.objects.begin(), view.objects.end(),
                               [](const ObjectSilhouette& s) { return s.label == "curtain"; });
  ASSERT_NE(it, view.objects.end());
  EXPECT_TRUE(it->fills_image);
  const auto box = silhouette_box(*it, sc.camera);
  ASSERT_TRUE(box);
  EXPECT_EQ(box->left(), 0.0);
  EXPECT_GE(box->right(), sc.camera.image_w);
  robot.theta = 3.14159;
  const SceneView away = camera_view(sc.world, robot, sc.camera, sc.camera_mount);
  EXPECT_TRUE(std::none_of(away.objects.begin(), away.objects.end(),
                           [](const ObjectSilhouette& s) { return s.label == "curtain"; }));
}

TEST(RayPrism, HitsAndMisses) {
  const SceneObject box{"b", Polygon{{{1, -1}, {2, -1}, {2, 1}, {1, 1}}}, false, 0.0, 1.0, false};
  EXPECT_NEAR(*ray_prism_hit({0, 0, 0.5}, {1, 0, 0}, box), 1.0, 1e-12);
  EXPECT_FALSE(ray_prism_hit({0, 0, 1.5}, {1, 0, 0}, box));
  EXPECT_FALSE(ray_prism_hit({0, 0, 0.5}, {-1, 0, 0}, box));
  EXPECT_NEAR(*ray_prism_hit({1.5, 0, 3}, {0, 0, -1}, box), 2.0, 1e-12);
  EXPECT_EQ(*ray_prism_hit({1.5, 0, 0.5}, {0, 1, 0}, box), 0.0);
}

TEST(CameraView, AheadVisibleBehindAbsent) {
  const Scenario sc = load_scenario(testing_support::scenario_path("curtain_room"));
  RobotState robot = sc.start;  // facing the curtain
  auto has = [](const SceneView& v, const std::string& l) {
    return std::any_of(v.objects.begin(), v.objects.end(), [&](const auto& o) { return o.label == l; });
  };
  EXPECT_TRUE(has(camera_view(sc.world, robot, sc.camera, sc.camera_mount), "curtain"));
  robot.theta = 3.14159;
  EXPECT_FALSE(has(camera_view(sc.world, robot, sc.camera, sc.camera_mount), "curtain"));
}

TEST(GroundSynthetic, TightBoxesWithoutNoise) {
  const Scenario sc = load_scenario(testing_support::scenario_path("curtain_room"));
  const SceneView view = camera_view(sc.world, sc.start, sc.camera, sc.camera_mount);
  const std::vector<std::string> labels{"curtain", "sofa"};
  const auto boxes = ground_synthetic(view, labels, sc.camera, GrounderNoise{});
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].label, "curtain");
  EXPECT_GT(boxes[0].box.w, 0);
  EXPECT_LE(boxes[0].box.right(), sc.camera.image_w + 1e-9);
  EXPECT_THROW(ground_synthetic(view, {}, sc.camera, GrounderNoise{}), std::invalid_argument);
}

TEST(GroundSynthetic, DeterministicGivenSeedAndNoiseEffects) {
  const Scenario sc = load_scenario(testing_support::scenario_path("curtain_room"));
  const SceneView view = camera_view(sc.world, sc.start, sc.camera, sc.camera_mount);
  const std::vector<std::string> labels{"curtain"};
  GrounderNoise noise{0.5, 2.0, 0.2, 99};
  const auto a = ground_synthetic(view, labels, sc.camera, noise);
  const auto b = ground_synthetic(view, labels, sc.camera, noise);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].box.cx, b[i].box.cx);

  int splits = 0, drops = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    noise.seed = seed;
    const auto boxes = ground_synthetic(view, labels, sc.camera, noise);
    if (boxes.empty()) ++drops;
    if (boxes.size() == 2) ++splits;
    for (const auto& box : boxes) {
      EXPECT_GE(box.box.left(), 0.0);
      EXPECT_LE(box.box.right(), sc.camera.image_w + 1e-9);
    }
  }
  EXPECT_NEAR(drops / 400.0, 0.2, 0.07);
  EXPECT_NEAR(splits / 400.0, 0.8 * 0.5, 0.08);
}

TEST(GroundSynthetic, SplitPiecesCoverTheOriginal) {
  const Scenario sc = load_scenario(testing_support::scenario_path("curtain_room"));
  const SceneView view = camera_view(sc.world, sc.start, sc.camera, sc.camera_mount);
  const std::vector<std::string> labels{"curtain"};
  const auto tight = ground_synthetic(view, labels, sc.camera, GrounderNoise{})[0].box;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto boxes = ground_synthetic(view, labels, sc.camera, GrounderNoise{1.0, 0.0, 0.0, seed});
    ASSERT_EQ(boxes.size(), 2u);
    const double l = std::min(boxes[0].box.left(), boxes[1].box.left());
    const double r = std::max(boxes[0].box.right(), boxes[1].box.right());
    EXPECT_LE(l, tight.left());
    EXPECT_GE(r, tight.right());
    // The pieces touch or overlap along the cut.
    const auto& lo = boxes[0].box.left() < boxes[1].box.left() ? boxes[0].box : boxes[1].box;
    const auto& hi = boxes[0].box.left() < boxes[1].box.left() ? boxes[1].box : boxes[0].box;
    EXPECT_GE(lo.right(), hi.left());
  }
}

TEST(AttachAttributes, CopiesDirectiveAttribute) {
  const std::vector<LabeledBox> boxes{{"curtain", {10, 10, 5, 5}}, {"chair", {50, 50, 5, 5}}, {"curtain", {1, 1, 1, 1}}};
  const std::vector<LandmarkDirective> ds{{"curtain", Attribute::Traversable, "go through"},
                                          {"chair", Attribute::Untraversable, "watch out"}};
  const auto out = attach_attributes(boxes, ds);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].attribute, Attribute::Traversable);
  EXPECT_EQ(out[1].attribute, Attribute::Untraversable);
  EXPECT_EQ(out[2].attribute, Attribute::Traversable);
  const std::vector<LabeledBox> stray{{"table", {1, 1, 1, 1}}};
  EXPECT_THROW(attach_attributes(stray, ds), UnknownLabelError);
}

TEST(DetectorPrompt, JoinsLabels) {
  const std::vector<std::string> labels{"curtain", "chair"};
  EXPECT_EQ(detector_prompt(labels), "curtain, chair");
}
