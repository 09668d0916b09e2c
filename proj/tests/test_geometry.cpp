#include <random>

#include <gtest/gtest.h>

#include "bakelabel/geometry.hpp"
#include "bakelabel/synthetic.hpp"
#include "oracles.hpp"

using namespace bakelabel;

namespace {

BoundingBox random_box(std::mt19937_64& rng) {
  return {synthetic::uniform(rng, -50, 200), synthetic::uniform(rng, -50, 200), synthetic::uniform(rng, 0.5, 120),
          synthetic::uniform(rng, 0.5, 120)};
}

Detection det(BoundingBox b, double score, std::optional<CategoryId> label = std::nullopt) {
  return {b, score, label, "test"};
}

}  // namespace

TEST(Area, Examples) {
  EXPECT_EQ(area({0, 0, 2, 2}), 4.0);
  EXPECT_EQ(area({5, 5, 1, 1}), 1.0);
  EXPECT_EQ(area({0, 0, 95, 95}), 95.0 * 95.0);
  EXPECT_EQ(area({0, 0, 95, 95}), 9025.0);
}

TEST(Iou, Examples) {
  EXPECT_EQ(iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_EQ(iou({0, 0, 1, 1}, {5, 5, 1, 1}), 0.0);
  // intersection 2, union 6
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {1, 0, 2, 2}), 2.0 / 6.0);
}

TEST(Iou, EdgeTouchingBoxesHaveZeroOverlap) {
  EXPECT_EQ(iou({0, 0, 1, 1}, {1, 0, 1, 1}), 0.0);
  EXPECT_EQ(capture_rate({0, 0, 1, 1}, {1, 1, 1, 1}), 0.0);
}

TEST(Iou, PropertiesOnRandomBoxes) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5000; ++i) {
    const auto a = random_box(rng);
    const auto b = random_box(rng);
    const double v = iou(a, b);
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(iou(a, a), 1.0);
    EXPECT_NEAR(v, oracle::box_iou(a, b), 1e-12);
    EXPECT_EQ(v, iou(a, b));  // pure
  }
}

TEST(CaptureRate, Examples) {
  EXPECT_EQ(capture_rate({2, 2, 4, 4}, {0, 0, 10, 10}), 1.0);
  // intersection 2x2 = 4 of inner area 16
  EXPECT_DOUBLE_EQ(capture_rate({8, 8, 4, 4}, {0, 0, 10, 10}), 4.0 / 16.0);
  EXPECT_EQ(capture_rate({0, 0, 1, 1}, {50, 50, 3, 3}), 0.0);
}

TEST(CaptureRate, AsymmetricAndExactOnContainment) {
  EXPECT_DOUBLE_EQ(capture_rate({0, 0, 10, 10}, {2, 2, 4, 4}), 16.0 / 100.0);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto outer = random_box(rng);
    const double fx = synthetic::uniform(rng, 0, 1), fy = synthetic::uniform(rng, 0, 1);
    const double fw = synthetic::uniform(rng, 0.01, 1 - fx), fh = synthetic::uniform(rng, 0.01, 1 - fy);
    BoundingBox inner{outer.x + fx * outer.w, outer.y + fy * outer.h, fw * outer.w, fh * outer.h};
    if (inner.x < outer.x || inner.right() > outer.right() || inner.y < outer.y || inner.bottom() > outer.bottom()) {
      continue;  // rounding pushed it out
    }
    EXPECT_EQ(capture_rate(inner, outer), 1.0);
  }
}

TEST(ImageAreaFraction, Examples) {
  const ImageDims dims{100, 100};
  EXPECT_EQ(image_area_fraction({0, 0, 100, 100}, dims), 1.0);
  EXPECT_DOUBLE_EQ(image_area_fraction({0, 0, 95, 95}, dims), 9025.0 / 10000.0);
  EXPECT_DOUBLE_EQ(image_area_fraction({0, 0, 89, 100}, dims), 8900.0 / 10000.0);
}

TEST(ImageAreaFraction, RejectsBoxOutsideImage) {
  EXPECT_THROW(image_area_fraction({-1, 0, 10, 10}, {100, 100}), Error);
  EXPECT_THROW(image_area_fraction({95, 0, 10, 10}, {100, 100}), Error);
}

TEST(Clip, ClampsAndRejectsEmpty) {
  const ImageDims dims{100, 50};
  auto c = clip({-10, 40, 30, 30}, dims);
  ASSERT_TRUE(c);
  EXPECT_EQ(*c, (BoundingBox{0, 40, 20, 10}));
  EXPECT_FALSE(clip({120, 0, 10, 10}, dims));
  EXPECT_EQ(*clip({1, 1, 2, 2}, dims), (BoundingBox{1, 1, 2, 2}));
}

TEST(WellFormed, RejectsDegenerateBoxes) {
  EXPECT_FALSE(is_well_formed({0, 0, 0, 1}));
  EXPECT_FALSE(is_well_formed({0, 0, 1, -1}));
  EXPECT_FALSE(is_well_formed({0, 0, std::nan(""), 1}));
  EXPECT_THROW(require_well_formed({0, 0, 0, 0}, "box"), Error);
  EXPECT_TRUE(is_well_formed({0.5, 0.5, 0.1, 0.1}));
}

TEST(Nms, ClassAgnosticSuppressesAcrossLabels) {
  const BoundingBox b{10, 10, 50, 50};
  std::vector<Detection> dets{det(b, 0.8, 2), det(b, 0.9, 1)};
  auto kept = nms(dets, 0.5, true);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_EQ(kept[0].label, 1);
}

TEST(Nms, PerClassKeepsDifferentLabels) {
  const BoundingBox b{10, 10, 50, 50};
  auto kept = nms({det(b, 0.9, 1), det(b, 0.8, 2)}, 0.5, false);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_EQ(kept[1].score, 0.8);
}

TEST(Nms, DisjointBoxesAllSurvive) {
  auto kept = nms({det({0, 0, 1, 1}, 0.5), det({5, 5, 1, 1}, 0.7), det({10, 10, 1, 1}, 0.6)}, 0.5, true);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[0].score, 0.7);
  EXPECT_EQ(kept[2].score, 0.5);
}

TEST(Nms, EqualScoresPreferLexicographicallySmallerBox) {
  auto kept = nms({det({1, 0, 10, 10}, 0.5), det({0, 0, 10, 10}, 0.5)}, 0.5, true);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].box.x, 0.0);
}

TEST(Nms, PropertiesOnRandomSets) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 300; ++round) {
    std::vector<Detection> dets;
    const int n = synthetic::uniform_int(rng, 0, 25);
    for (int i = 0; i < n; ++i) {
      dets.push_back(det(random_box(rng), synthetic::uniform_int(rng, 1, 10) / 10.0, synthetic::uniform_int(rng, 0, 2)));
    }
    const double thr = synthetic::uniform(rng, 0.1, 0.9);
    const bool agnostic = round % 2 == 0;
    auto kept = nms(dets, thr, agnostic);
    for (const auto& k : kept) EXPECT_NE(std::find(dets.begin(), dets.end(), k), dets.end());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        if (agnostic || kept[i].label == kept[j].label) {
          EXPECT_LE(iou(kept[i].box, kept[j].box), thr);
        }
      }
      if (i > 0) {
        EXPECT_FALSE(ranks_before(kept[i], kept[i - 1]));
      }
    }
    EXPECT_EQ(nms(kept, thr, agnostic), kept);
    // input order does not matter
    synthetic::shuffle(dets, rng);
    EXPECT_EQ(nms(dets, thr, agnostic), kept);
  }
}
