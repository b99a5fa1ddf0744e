#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "random_inputs.hpp"
#include "travnav/segmentation.hpp"

using namespace travnav;

namespace {

AttributedBox box(double l, double t, double r, double b, Attribute a) {
  return {BoundingBox::from_edges(l, t, r, b), "x", a};
}

}  // namespace

TEST(Segment, EmptyBoxesMeansAllUntraversable) {
  const CameraModel cam = CameraModel::default_synthetic();
  PointCloud cloud{{{1, 0, 0}, {2, 1, 0}, {-1, 0, 0}}, 0};
  const auto seg = segment(cloud, {}, cam);
  EXPECT_TRUE(seg.traversable.empty());
  EXPECT_EQ(seg.untraversable, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Segment, OverlapIsUntraversable) {
  const CameraModel cam = CameraModel::default_synthetic();
  PointCloud cloud{{{2, 0, 0}, {2, 0.4, 0}}, 0};  // u = 320 and u = 320 - 105
  const std::vector<AttributedBox> boxes{box(200, 200, 400, 280, Attribute::Traversable),
                                         box(300, 200, 340, 280, Attribute::Untraversable)};
  const auto seg = segment(cloud, boxes, cam);
  EXPECT_EQ(seg.traversable, (std::vector<std::size_t>{1}));
  EXPECT_EQ(seg.untraversable, (std::vector<std::size_t>{0}));
}

TEST(Segment, BehindCameraIsUntraversableEvenInsideBox) {
  const CameraModel cam = CameraModel::default_synthetic();
  PointCloud cloud{{{-2, 0, 0}}, 0};
  const std::vector<AttributedBox> boxes{box(0, 0, 640, 480, Attribute::Traversable)};
  EXPECT_EQ(segment(cloud, boxes, cam).untraversable.size(), 1u);
}

TEST(Segment, MatchesBruteForceAndIsWorkerIndependent) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const CameraModel cam = testing_support::forward_camera(rng);
    const PointCloud cloud = testing_support::random_cloud(rng, 300);
    const auto boxes = testing_support::random_boxes(rng, cam, 1 + trial % 5);
    const auto ref = oracle::segment(cloud, boxes, cam);
    ASSERT_EQ(segment(cloud, boxes, cam), ref);
    ASSERT_EQ(segment(cloud, boxes, cam, 3), ref);
  }
}

TEST(Segment, SplitBoxGivesSameTraversableSet) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    const CameraModel cam = testing_support::forward_camera(rng);
    const PointCloud cloud = testing_support::random_cloud(rng, 400);
    auto boxes = testing_support::random_boxes(rng, cam, 3);
    boxes[0].attribute = Attribute::Traversable;
    const auto whole = segment(cloud, boxes, cam);
    const BoundingBox b = boxes[0].box;
    std::vector<AttributedBox> split(boxes.begin() + 1, boxes.end());
    if (trial % 2 == 0) {
      const double cut = b.left() + frac(rng) * b.w;
      split.push_back(box(b.left(), b.top(), cut, b.bottom(), Attribute::Traversable));
      split.push_back(box(cut, b.top(), b.right(), b.bottom(), Attribute::Traversable));
    } else {
      const double cut = b.top() + frac(rng) * b.h;
      split.push_back(box(b.left(), b.top(), b.right(), cut, Attribute::Traversable));
      split.push_back(box(b.left(), cut, b.right(), b.bottom(), Attribute::Traversable));
    }
    EXPECT_EQ(segment(cloud, split, cam).traversable, whole.traversable) << "trial " << trial;
  }
}

TEST(Segment, PartitionIsDisjointAndExhaustive) {
  std::mt19937_64 rng(31);
  const CameraModel cam = testing_support::forward_camera(rng);
  const PointCloud cloud = testing_support::random_cloud(rng, 1000);
  const auto seg = segment(cloud, testing_support::random_boxes(rng, cam, 4), cam, 4);
  std::vector<int> seen(cloud.points.size(), 0);
  for (auto i : seg.traversable) ++seen[i];
  for (auto i : seg.untraversable) ++seen[i];
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_TRUE(std::is_sorted(seg.traversable.begin(), seg.traversable.end()));
  EXPECT_TRUE(std::is_sorted(seg.untraversable.begin(), seg.untraversable.end()));
}
