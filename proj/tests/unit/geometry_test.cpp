#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "random_inputs.hpp"
#include "travnav/geometry.hpp"

using namespace travnav;

TEST(Projection, PointOnOpticalAxisLandsOnPrincipalPoint) {
  const CameraModel cam = CameraModel::default_synthetic();
  const auto px = project({2.0, 0.0, 0.0}, cam);
  ASSERT_TRUE(px);
  EXPECT_NEAR(px->u, cam.u0, 1e-12);
  EXPECT_NEAR(px->v, cam.v0, 1e-12);
  EXPECT_NEAR(px->depth, 2.0, 1e-12);
}

TEST(Projection, LeftOfRobotMapsToSmallerU) {
  const CameraModel cam = CameraModel::default_synthetic();
  const auto left = project({2.0, 0.5, 0.0}, cam);
  const auto up = project({2.0, 0.0, 0.5}, cam);
  ASSERT_TRUE(left && up);
  EXPECT_NEAR(left->u, cam.u0 - cam.f * cam.sx * 0.25, 1e-9);
  EXPECT_NEAR(up->v, cam.v0 - cam.f * cam.sy * 0.25, 1e-9);
}

TEST(Projection, BehindAndOnPlaneAreRejected) {
  const CameraModel cam = CameraModel::default_synthetic();
  EXPECT_FALSE(project({-1.0, 0.0, 0.0}, cam));
  EXPECT_FALSE(project({0.0, 1.0, 0.0}, cam));
  EXPECT_FALSE(project({kDepthEpsilon, 0.0, 0.0}, cam));
  EXPECT_TRUE(project({2 * kDepthEpsilon, 0.0, 0.0}, cam));
}

TEST(Projection, CoordinatesAreNotClipped) {
  const CameraModel cam = CameraModel::default_synthetic();
  const auto px = project({1.0, -5.0, 0.0}, cam);
  ASSERT_TRUE(px);
  EXPECT_GT(px->u, cam.image_w);
  EXPECT_FALSE(inside_image(*px, cam));
}

TEST(Projection, MatchesHomogeneousOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-5, 5);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const CameraModel cam = testing_support::random_camera(rng);
    const double x = coord(rng), y = coord(rng), z = coord(rng);
    const auto ref = oracle::homogeneous(cam, x, y, z);
    const auto got = project({x, y, z}, cam);
    if (ref.w <= kDepthEpsilon) {
      EXPECT_FALSE(got);
      continue;
    }
    ASSERT_TRUE(got);
    EXPECT_NEAR(got->u, ref.u, 1e-9 * std::max(1.0, std::abs(ref.u)));
    EXPECT_NEAR(got->v, ref.v, 1e-9 * std::max(1.0, std::abs(ref.v)));
    EXPECT_NEAR(got->depth, ref.w, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 500);
}

TEST(Camera, ValidateRejectsBadIntrinsicsAndRotation) {
  CameraModel cam = CameraModel::default_synthetic();
  EXPECT_NO_THROW(cam.validate());
  cam.sx = 0;
  EXPECT_THROW(cam.validate(), std::invalid_argument);
  cam = CameraModel::default_synthetic();
  cam.rotation(0, 0) += 1e-6;
  EXPECT_THROW(cam.validate(), std::invalid_argument);
  cam = CameraModel::default_synthetic();
  cam.rotation = -cam.rotation;  // reflection, det -1
  EXPECT_THROW(cam.validate(), std::invalid_argument);
  cam = CameraModel::default_synthetic();
  cam.image_w = 0;
  EXPECT_THROW(cam.validate(), std::invalid_argument);
}

TEST(Camera, JsonRoundTrip) {
  std::mt19937_64 rng(9);
  const CameraModel cam = testing_support::random_camera(rng);
  const CameraModel back = camera_from_json_text(camera_to_json_text(cam));
  EXPECT_EQ(back.f, cam.f);
  EXPECT_EQ(back.sx, cam.sx);
  EXPECT_EQ(back.skew, cam.skew);
  EXPECT_EQ(back.image_h, cam.image_h);
  EXPECT_TRUE(back.rotation.isApprox(cam.rotation, 0));
  EXPECT_TRUE(back.translation.isApprox(cam.translation, 0));
}

TEST(Camera, JsonMissingFieldThrows) {
  EXPECT_THROW(camera_from_json_text(R"({"f": 1})"), std::invalid_argument);
  EXPECT_THROW(camera_from_json_text("not json"), std::invalid_argument);
}

TEST(BoundingBoxTest, ClosedIntervals) {
  const BoundingBox b{100, 100, 20, 10};
  EXPECT_TRUE(in_box({90, 95, 1}, b));
  EXPECT_TRUE(in_box({110, 105, 1}, b));
  EXPECT_FALSE(in_box({110.000001, 105, 1}, b));
  EXPECT_FALSE(in_box({100, 94.999, 1}, b));
}

TEST(BoundingBoxTest, FromEdgesCoversRequestedEdges) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0, 640);
  for (int i = 0; i < 10000; ++i) {
    double l = d(rng), r = d(rng), t = d(rng), b = d(rng);
    if (l > r) std::swap(l, r);
    if (t > b) std::swap(t, b);
    if (r - l < 1e-6 || b - t < 1e-6) continue;
    const auto box = BoundingBox::from_edges(l, t, r, b);
    ASSERT_LE(box.left(), l);
    ASSERT_GE(box.right(), r);
    ASSERT_LE(box.top(), t);
    ASSERT_GE(box.bottom(), b);
    ASSERT_LT(box.right() - r, 1e-9);
  }
}
