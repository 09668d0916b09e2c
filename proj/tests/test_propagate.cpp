#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "bakelabel/propagate.hpp"
#include "bakelabel/synthetic.hpp"

using namespace bakelabel;

namespace {

Detection labeled(double score, CategoryId label, double x = 0) { return {{x, 0, 10, 10}, score, label, "yolo"}; }

const PropagationConfig kCfg{};

}  // namespace

TEST(SelectQueries, PredictedCutoffIsInclusive) {
  auto sel = select_queries("v", {labeled(0.69, 1, 0), labeled(0.9, 1, 20), labeled(0.7, 2, 40)},
                            QueryOrigin::predicted, kCfg);
  ASSERT_EQ(sel.queries.size(), 2u);
  EXPECT_EQ(sel.dropped, 1u);
  EXPECT_EQ(sel.queries[0].score, 0.9);
  EXPECT_EQ(sel.queries[0].instance_id, 0);
  EXPECT_EQ(sel.queries[1].score, 0.7);
  EXPECT_EQ(sel.queries[1].instance_id, 1);
  EXPECT_EQ(sel.queries[1].origin, QueryOrigin::predicted);
}

TEST(SelectQueries, ManualKeepsAll) {
  auto sel = select_queries("v", {labeled(0.1, 1), labeled(0.05, 2, 30)}, QueryOrigin::manual, kCfg);
  EXPECT_EQ(sel.queries.size(), 2u);
  EXPECT_EQ(sel.dropped, 0u);
  EXPECT_TRUE(select_queries("v", {}, QueryOrigin::predicted, kCfg).queries.empty());
}

TEST(SelectQueries, UnlabeledPredictedIsError) {
  Detection d{{0, 0, 1, 1}, 0.9, std::nullopt, ""};
  EXPECT_THROW(select_queries("v", {d}, QueryOrigin::predicted, kCfg), Error);
}

TEST(SelectQueries, QueryStream) {
  std::istringstream in(
      R"({"image_id": "v1/000000", "video_id": "v1", "x": 0, "y": 0, "w": 5, "h": 5, "score": 0.8, "label": 2, "origin": "predicted"})"
      "\n"
      R"({"image_id": "v1/000000", "video_id": "v1", "x": 9, "y": 0, "w": 5, "h": 5, "score": 0.3, "label": 2, "origin": "predicted"})"
      "\n"
      R"({"image_id": "v2", "x": 0, "y": 0, "w": 5, "h": 5, "score": 0.3, "label": 4})"
      "\n");
  const auto recs = read_query_stream(in, "q.jsonl");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[2].video_id, "v2");
  EXPECT_EQ(recs[2].origin, QueryOrigin::manual);
  const auto sel = select_query_records(recs, kCfg);
  EXPECT_EQ(sel.queries.size(), 2u);
  EXPECT_EQ(sel.dropped, 1u);
}

TEST(IngestTrackStream, LabelsAreFrozen) {
  const auto cats = bakery_taxonomy();
  std::vector<FirstFrameQuery> q{{"v", 0, {0, 0, 10, 10}, 7, 1.0, QueryOrigin::manual}};
  std::vector<TrackRecord> tracks;
  for (int f = 0; f < 10; ++f) tracks.push_back({"v", f, 0, {double(f), 0, 10, 10}, /*stream label*/ 3, 0.9});
  const auto store = ingest_track_stream(tracks, q, cats, {ImageDims{100, 100}, "V_train"});
  ASSERT_EQ(store.annotations.size(), 10u);
  EXPECT_EQ(store.images.size(), 10u);
  for (const auto& a : store.annotations) {
    EXPECT_EQ(a.category_id, 7);
    EXPECT_EQ(a.provenance, Provenance::pseudo);
  }
  EXPECT_EQ(store.split_tag, "V_train");
  EXPECT_EQ(store.images[3].meta.frame_index, 3);
  EXPECT_EQ(store.images[3].id, "v/000003");
}

TEST(IngestTrackStream, OrphanAndDuplicateRecords) {
  const auto cats = bakery_taxonomy();
  std::vector<FirstFrameQuery> q{{"v", 0, {0, 0, 10, 10}, 7, 1.0, QueryOrigin::manual}};
  try {
    ingest_track_stream({{"v", 0, 5, {0, 0, 1, 1}, 7, 1.0}}, q, cats);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::integrity);
    EXPECT_NE(std::string(e.what()).find("instance_id 5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ingest_track_stream({{"v", 1, 0, {0, 0, 1, 1}, 7, 1.0}, {"v", 1, 0, {1, 0, 1, 1}, 7, 1.0}}, q, cats),
               Error);
}

TEST(IngestTrackStream, TrainSizedStreamTagsSplit) {
  // 167 videos, ~30 frames each, 3 instances per video
  const auto cats = bakery_taxonomy();
  std::vector<FirstFrameQuery> q;
  std::vector<TrackRecord> t;
  std::set<std::string> videos;
  for (int v = 0; v < 167; ++v) {
    const auto vid = "video" + std::to_string(v);
    videos.insert(vid);
    for (int i = 0; i < 3; ++i) q.push_back({vid, i, {20.0 * i, 0, 10, 10}, 1 + (v + i) % 18, 1.0, QueryOrigin::manual});
    const int frames = 29 + v % 3;
    for (int f = 0; f < frames; ++f) {
      for (int i = 0; i < 3; ++i) t.push_back({vid, f, i, {20.0 * i + 0.1 * f, 0, 10, 10}, 0, 0.95});
    }
  }
  const auto store = ingest_track_stream(t, q, cats, {ImageDims{1920, 1080}, "V_train"});
  validate(store);
  std::set<std::string> seen;
  for (const auto& img : store.images) seen.insert(*img.meta.video_id);
  EXPECT_EQ(seen, videos);
  EXPECT_EQ(store.split_tag, "V_train");
  EXPECT_EQ(store.annotations.size(), t.size());
}

TEST(GreedyIouPropagate, TranslatingObjectsKeepIdentity) {
  std::mt19937_64 rng(12);
  const auto v = synthetic::motion_video(rng, "vid", 5, 10, 40.0, 2.0);
  auto tracks = greedy_iou_propagate(v.queries, v.candidates, kCfg);
  ASSERT_EQ(tracks.size(), 50u);
  auto key = [](const TrackRecord& t) { return std::make_tuple(t.frame_index, t.instance_id); };
  std::sort(tracks.begin(), tracks.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  auto truth = v.truth;
  std::sort(truth.begin(), truth.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  EXPECT_EQ(tracks, truth);
}

TEST(GreedyIouPropagate, DisappearingObjectEndsTrack) {
  std::vector<FirstFrameQuery> q{{"v", 0, {0, 0, 40, 40}, 1, 1.0, QueryOrigin::manual}};
  FrameCandidates c;
  for (int f = 0; f < 10; ++f) {
    if (f < 5) c[f].push_back({2.0 * f, 0, 40, 40});
    c[f].push_back({300, 300, 40, 40});  // unrelated object
  }
  const auto tracks = greedy_iou_propagate(q, c, kCfg);
  ASSERT_EQ(tracks.size(), 5u);
  EXPECT_EQ(tracks.back().frame_index, 4);
}

TEST(GreedyIouPropagate, JumpWithoutOverlapEndsBothTracks) {
  std::vector<FirstFrameQuery> q{{"v", 0, {0, 0, 40, 40}, 1, 1.0, QueryOrigin::manual},
                                 {"v", 1, {100, 0, 40, 40}, 2, 1.0, QueryOrigin::manual}};
  FrameCandidates c;
  c[0] = {{0, 0, 40, 40}, {100, 0, 40, 40}};
  // both objects jump to places with zero IoU to every previous box
  c[1] = {{200, 100, 40, 40}, {300, 100, 40, 40}};
  const auto tracks = greedy_iou_propagate(q, c, kCfg);
  EXPECT_EQ(tracks.size(), 2u);
  for (const auto& t : tracks) EXPECT_EQ(t.frame_index, 0);
}

TEST(GreedyIouPropagate, ExactPositionSwapIsIndistinguishable) {
  // Candidates carry no identity: when two objects trade places exactly, each
  // track follows the box now occupying its old position.
  std::vector<FirstFrameQuery> q{{"v", 0, {0, 0, 40, 40}, 1, 1.0, QueryOrigin::manual},
                                 {"v", 1, {100, 0, 40, 40}, 2, 1.0, QueryOrigin::manual}};
  FrameCandidates c;
  c[1] = {{100, 0, 40, 40}, {0, 0, 40, 40}};
  const auto tracks = greedy_iou_propagate(q, c, kCfg);
  ASSERT_EQ(tracks.size(), 4u);
  EXPECT_EQ(tracks[2].box, (BoundingBox{0, 0, 40, 40}));
  EXPECT_EQ(tracks[2].instance_id, 0);
}

TEST(GreedyIouPropagate, CandidateUsedOnce) {
  // two tracks competing for one candidate
  std::vector<FirstFrameQuery> q{{"v", 0, {0, 0, 40, 40}, 1, 1.0, QueryOrigin::manual},
                                 {"v", 1, {5, 0, 40, 40}, 1, 1.0, QueryOrigin::manual}};
  FrameCandidates c;
  c[1] = {{4, 0, 40, 40}};
  const auto tracks = greedy_iou_propagate(q, c, kCfg);
  ASSERT_EQ(tracks.size(), 3u);
  EXPECT_EQ(tracks[2].instance_id, 1);  // higher IoU wins
}

TEST(GreedyIouPropagate, NeverReusesCandidateOnRandomVideos) {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 50; ++round) {
    auto v = synthetic::motion_video(rng, "v", 8, 12, 40.0, 8.0);
    // add clutter near objects
    for (auto& [f, boxes] : v.candidates) {
      const auto n = boxes.size();
      for (std::size_t k = 0; k < n; k += 3) boxes.push_back({boxes[k].x + 15, boxes[k].y + 15, 40, 40});
    }
    const auto tracks = greedy_iou_propagate(v.queries, v.candidates, kCfg);
    std::set<std::tuple<int, double, double>> used;
    for (const auto& t : tracks) {
      if (t.frame_index == 0) continue;
      EXPECT_TRUE(used.insert({t.frame_index, t.box.x, t.box.y}).second);
    }
  }
}

TEST(CostReport, Examples) {
  EXPECT_NEAR(cost_report(167, 4945), 1.0 - 167.0 / 4945.0, 1e-15);
  EXPECT_NEAR(cost_report(167, 4945), 0.9662, 1e-4);
  EXPECT_EQ(cost_report(0, 100), 1.0);
  EXPECT_EQ(cost_report(100, 100), 0.0);
  EXPECT_THROW(cost_report(0, 0), Error);
  EXPECT_THROW(cost_report(5, 4), Error);
}

TEST(IdentityPreservation, PerfectAndBroken) {
  std::mt19937_64 rng(8);
  const auto v = synthetic::motion_video(rng, "v");
  const auto tracks = greedy_iou_propagate(v.queries, v.candidates, kCfg);
  EXPECT_EQ(identity_preservation(v.truth, tracks), 1.0);
  auto half = tracks;
  std::erase_if(half, [](const TrackRecord& t) { return t.frame_index >= 5; });
  EXPECT_DOUBLE_EQ(identity_preservation(v.truth, half), 0.5);
}
