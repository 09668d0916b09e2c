#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "bakelabel/filters.hpp"
#include "bakelabel/synthetic.hpp"

using namespace bakelabel;

namespace {

Detection det(BoundingBox b, double score = 0.5) { return {b, score, std::nullopt, "t"}; }

const FilterConfig kDefault{};

std::vector<Detection> sorted(std::vector<Detection> v) {
  sort_by_rank(v);
  return v;
}

}  // namespace

TEST(FilterConfig, Defaults) {
  EXPECT_EQ(kDefault.background_area_fraction, 0.90);
  EXPECT_EQ(kDefault.duplicate_iou, 0.75);
  EXPECT_EQ(kDefault.containment_capture, 0.95);
  EXPECT_EQ(kDefault.crowd_min_contained, 3);
  EXPECT_THROW((FilterConfig{0.0, 0.75, 0.95, 3}.validate()), Error);
  EXPECT_THROW((FilterConfig{0.9, 1.5, 0.95, 3}.validate()), Error);
  EXPECT_THROW((FilterConfig{0.9, 0.75, 0.95, 1}.validate()), Error);
}

TEST(BackgroundFilter, InclusiveBoundary) {
  const ImageDims dims{100, 100};
  auto t = background_filter({det({0, 0, 95, 95}), det({0, 0, 89, 100}), det({0, 0, 90, 100})}, dims, kDefault);
  ASSERT_EQ(t.kept.size(), 1u);
  EXPECT_EQ(t.kept[0].box.w, 89.0);
  ASSERT_EQ(t.removed.size(), 2u);
  EXPECT_EQ(t.removed_at(FilterStage::background), 2u);
}

TEST(DuplicateFilter, LowerScoreRemoved) {
  // IoU of (0,0,10,10) and (1,0,10,10) is 90 / 110 ~ 0.818
  auto t = duplicate_filter({det({1, 0, 10, 10}, 0.7), det({0, 0, 10, 10}, 0.9)}, kDefault);
  ASSERT_EQ(t.kept.size(), 1u);
  EXPECT_EQ(t.kept[0].score, 0.9);
  ASSERT_EQ(t.removed.size(), 1u);
  EXPECT_EQ(t.removed[0].detection.score, 0.7);
}

TEST(DuplicateFilter, StrictBoundary) {
  // intersection 3, union 4: IoU exactly 0.75
  ASSERT_EQ(iou({0, 0, 4, 1}, {0, 0, 3, 1}), 0.75);
  auto t = duplicate_filter({det({0, 0, 4, 1}, 0.9), det({0, 0, 3, 1}, 0.8)}, kDefault);
  EXPECT_EQ(t.kept.size(), 2u);
}

TEST(DuplicateFilter, ChainKeepsEnds) {
  // Hand simulation: A is kept first; B overlaps A at 910/1090 ~ 0.835 and is
  // dropped; C overlaps only the dropped B strongly, and A at 820/1180 ~ 0.695,
  // so it is kept.
  const BoundingBox a{0, 0, 100, 10}, b{9, 0, 100, 10}, c{18, 0, 100, 10};
  ASSERT_GT(iou(a, b), 0.75);
  ASSERT_GT(iou(b, c), 0.75);
  ASSERT_LE(iou(a, c), 0.75);
  auto t = duplicate_filter({det(c, 0.7), det(b, 0.8), det(a, 0.9)}, kDefault);
  ASSERT_EQ(t.kept.size(), 2u);
  EXPECT_EQ(t.kept[0].box, a);
  EXPECT_EQ(t.kept[1].box, c);
  ASSERT_EQ(t.removed.size(), 1u);
  EXPECT_EQ(t.removed[0].detection.box, b);
}

TEST(CrowdFilter, ThreeContainedRemovesContainer) {
  const BoundingBox big{0, 0, 100, 100};
  auto t = crowd_filter({det(big), det({5, 5, 10, 10}), det({40, 40, 10, 10}), det({70, 70, 10, 10})}, kDefault);
  ASSERT_EQ(t.removed.size(), 1u);
  EXPECT_EQ(t.removed[0].detection.box, big);
  EXPECT_EQ(t.removed[0].stage, FilterStage::crowd);
  EXPECT_EQ(t.kept.size(), 3u);
}

TEST(CrowdFilter, TwoContainedKept) {
  auto t = crowd_filter({det({0, 0, 100, 100}), det({5, 5, 10, 10}), det({40, 40, 10, 10})}, kDefault);
  EXPECT_TRUE(t.removed.empty());
}

TEST(CrowdFilter, SimultaneousCounting) {
  // two big boxes both containing the same three small boxes (and each other's
  // containment does not matter for the count threshold)
  std::vector<Detection> in{det({0, 0, 100, 100}), det({1, 1, 98, 98}), det({5, 5, 10, 10}),
                            det({40, 40, 10, 10}), det({70, 70, 10, 10})};
  auto t = crowd_filter(in, kDefault);
  EXPECT_EQ(t.removed.size(), 2u);
  EXPECT_EQ(t.kept.size(), 3u);
  std::reverse(in.begin(), in.end());
  EXPECT_EQ(crowd_filter(in, kDefault).removed.size(), 2u);
}

TEST(CrowdFilter, StrictCaptureBoundary) {
  // inner (0,0,20,1) vs outer (1,0,100,1): 19/20 = 0.95 exactly
  ASSERT_EQ(capture_rate({0, 0, 20, 1}, {1, 0, 100, 1}), 0.95);
  std::vector<Detection> in{det({1, 0, 100, 1}), det({0, 0, 20, 1}), det({30, 0, 10, 1}), det({50, 0, 10, 1})};
  // only two boxes strictly exceed 0.95; the boundary one does not count
  EXPECT_TRUE(crowd_filter(in, kDefault).removed.empty());
}

TEST(NestedFilter, Examples) {
  auto t = nested_filter({det({0, 0, 100, 100}), det({10, 10, 20, 20})}, kDefault);
  ASSERT_EQ(t.removed.size(), 1u);
  EXPECT_EQ(t.removed[0].detection.box, (BoundingBox{10, 10, 20, 20}));

  // capture 0.5 both ways
  t = nested_filter({det({0, 0, 10, 10}), det({5, 0, 10, 10})}, kDefault);
  EXPECT_TRUE(t.removed.empty());

  // three levels: the inner two are inside the outermost
  t = nested_filter({det({0, 0, 100, 100}), det({10, 10, 50, 50}), det({20, 20, 10, 10})}, kDefault);
  ASSERT_EQ(t.kept.size(), 1u);
  EXPECT_EQ(t.kept[0].box, (BoundingBox{0, 0, 100, 100}));
  EXPECT_EQ(t.removed.size(), 2u);
}

TEST(NestedFilter, StrictCaptureBoundary) {
  auto t = nested_filter({det({1, 0, 100, 1}), det({0, 0, 20, 1})}, kDefault);
  EXPECT_TRUE(t.removed.empty());
}

TEST(Pipeline, FigureScene) {
  const auto scene = synthetic::figure_scene();
  const auto t = apply_pipeline(scene.detections, scene.dims, kDefault);
  ASSERT_EQ(t.removed.size(), 4u);
  EXPECT_EQ(t.removed[0].stage, FilterStage::background);
  EXPECT_EQ(t.removed[0].detection.box, (BoundingBox{5, 5, 990, 790}));
  EXPECT_EQ(t.removed[1].stage, FilterStage::duplicate);
  EXPECT_EQ(t.removed[1].detection.box, (BoundingBox{52, 52, 100, 100}));
  EXPECT_EQ(t.removed[2].stage, FilterStage::crowd);
  EXPECT_EQ(t.removed[2].detection.box, (BoundingBox{100, 300, 400, 150}));
  EXPECT_EQ(t.removed[3].stage, FilterStage::nested);
  EXPECT_EQ(t.removed[3].detection.box, (BoundingBox{220, 60, 40, 40}));
  ASSERT_EQ(t.kept.size(), 9u);
  for (const auto& obj : scene.objects) {
    EXPECT_TRUE(std::any_of(t.kept.begin(), t.kept.end(), [&](const Detection& d) { return d.box == obj; }));
  }
}

TEST(Pipeline, EmptyAndClean) {
  EXPECT_TRUE(apply_pipeline({}, {10, 10}, kDefault).kept.empty());
  const std::vector<Detection> clean{det({0, 0, 10, 10}, 0.9), det({20, 20, 10, 10}, 0.8)};
  const auto t = apply_pipeline(clean, {100, 100}, kDefault);
  EXPECT_EQ(t.kept, clean);
  EXPECT_TRUE(t.removed.empty());
}

TEST(Pipeline, PropertiesOnRandomScenes) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    auto scene = synthetic::random_scene(rng);
    const auto t = apply_pipeline(scene.detections, scene.dims, kDefault);
    // contraction and exact partition of the input
    ASSERT_EQ(t.kept.size() + t.removed.size(), scene.detections.size());
    std::vector<Detection> all = t.kept;
    for (const auto& r : t.removed) all.push_back(r.detection);
    EXPECT_EQ(sorted(all), sorted(scene.detections));
    // stages appear in pipeline order
    for (std::size_t k = 1; k < t.removed.size(); ++k) {
      EXPECT_LE(static_cast<int>(t.removed[k - 1].stage), static_cast<int>(t.removed[k].stage));
    }
    // idempotent
    const auto again = apply_pipeline(t.kept, scene.dims, kDefault);
    EXPECT_EQ(again.kept, t.kept);
    EXPECT_TRUE(again.removed.empty());
    // replaying stages reproduces kept
    auto b = background_filter(scene.detections, scene.dims, kDefault).kept;
    auto d = duplicate_filter(b, kDefault).kept;
    auto c = crowd_filter(d, kDefault).kept;
    EXPECT_EQ(nested_filter(c, kDefault).kept, t.kept);
    // input order only changes output order
    auto shuffled = scene.detections;
    synthetic::shuffle(shuffled, rng);
    EXPECT_EQ(sorted(apply_pipeline(shuffled, scene.dims, kDefault).kept), sorted(t.kept));
    // pass-through thresholds are the identity
    EXPECT_EQ(apply_pipeline(scene.detections, scene.dims, FilterConfig::pass_through()).kept.size(),
              scene.detections.size());
  }
}
