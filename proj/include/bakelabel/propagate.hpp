#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bakelabel/error.hpp"
#include "bakelabel/geometry.hpp"
#include "bakelabel/interchange.hpp"

namespace bakelabel {

enum class QueryOrigin { manual, predicted };

inline const char* to_string(QueryOrigin o) { return o == QueryOrigin::manual ? "manual" : "predicted"; }

inline std::optional<QueryOrigin> parse_query_origin(const std::string& s) {
  if (s == "manual") return QueryOrigin::manual;
  if (s == "predicted") return QueryOrigin::predicted;
  return std::nullopt;
}

/// Box + class seed for one object instance on the first frame of a video.
struct FirstFrameQuery {
  std::string video_id;
  int instance_id = 0;
  BoundingBox box;
  CategoryId label = 0;
  double score = 1.0;
  QueryOrigin origin = QueryOrigin::manual;

  bool operator==(const FirstFrameQuery&) const = default;
};

struct PropagationConfig {
  double query_score_cutoff = 0.7;
  double oracle_match_min_iou = 0.3;

  void validate() const {
    auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!open_unit(query_score_cutoff) || !open_unit(oracle_match_min_iou)) {
      fail(ErrorKind::validation, "propagation config: thresholds must lie in (0, 1)");
    }
  }
};

struct QuerySelection {
  std::vector<FirstFrameQuery> queries;
  std::size_t dropped = 0;  // predicted queries under the score cutoff
};

/// Predicted queries scoring below the cutoff are dropped (a score equal to the
/// cutoff is kept); manual queries are all kept. Instance ids run from 0 in
/// rank order.
inline QuerySelection select_queries(const std::string& video_id, std::vector<Detection> first_frame_dets,
                                     QueryOrigin origin, const PropagationConfig& cfg) {
  cfg.validate();
  sort_by_rank(first_frame_dets);
  QuerySelection sel;
  int next_instance = 0;
  for (const auto& d : first_frame_dets) {
    if (!d.label) {
      fail(ErrorKind::validation, "video '" + video_id + "': query without a class label");
    }
    if (origin == QueryOrigin::predicted && d.score < cfg.query_score_cutoff) {
      ++sel.dropped;
      continue;
    }
    sel.queries.push_back({video_id, next_instance++, d.box, *d.label, d.score, origin});
  }
  return sel;
}

/// One line of a query file: a detection-stream record plus `video_id`
/// (defaults to `image_id`) and `origin` (defaults to manual).
struct QueryRecord {
  std::string video_id;
  Detection detection;
  QueryOrigin origin = QueryOrigin::manual;
};

inline std::vector<QueryRecord> read_query_stream(std::istream& in, const std::string& source) {
  std::vector<QueryRecord> out;
  for_each_record(in, source, [&](const Json& j, std::size_t line) {
    const std::string ctx = source + ":" + std::to_string(line);
    auto det = detection_from_json(j, ctx);
    QueryRecord q;
    q.video_id = field::has(j, "video_id") ? field::get_string(j, "video_id", ctx) : det.image_id;
    q.detection = std::move(det.detection);
    if (field::has(j, "origin")) {
      const auto s = field::get_string(j, "origin", ctx);
      auto o = parse_query_origin(s);
      if (!o) fail(ErrorKind::schema, ctx + ": unknown origin '" + s + "'");
      q.origin = *o;
    }
    out.push_back(std::move(q));
  });
  return out;
}

/// Groups query records per video (sorted by video id) and selects each group.
/// A video may not mix manual and predicted queries.
inline QuerySelection select_query_records(const std::vector<QueryRecord>& records, const PropagationConfig& cfg) {
  std::map<std::string, std::pair<std::vector<Detection>, QueryOrigin>> per_video;
  for (const auto& r : records) {
    auto [it, inserted] = per_video.try_emplace(r.video_id, std::vector<Detection>{}, r.origin);
    if (!inserted && it->second.second != r.origin) {
      fail(ErrorKind::validation, "video '" + r.video_id + "': mixes manual and predicted queries");
    }
    it->second.first.push_back(r.detection);
  }
  QuerySelection all;
  for (auto& [video, group] : per_video) {
    auto sel = select_queries(video, std::move(group.first), group.second, cfg);
    all.dropped += sel.dropped;
    all.queries.insert(all.queries.end(), sel.queries.begin(), sel.queries.end());
  }
  return all;
}

inline std::string frame_image_id(const std::string& video_id, int frame_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", frame_index);
  return video_id + "/" + buf;
}

struct IngestOptions {
  std::optional<ImageDims> frame_dims;
  std::optional<std::string> split_tag;
};

/// Converts a tracker's output into pseudo annotations. Every record must
/// belong to a query; its class is the query's class regardless of what the
/// stream carries. One image is created per (video, frame) seen.
inline DatasetStore ingest_track_stream(const std::vector<TrackRecord>& tracks,
                                        const std::vector<FirstFrameQuery>& queries,
                                        const CategoryTable& categories, const IngestOptions& opts = {}) {
  std::map<std::pair<std::string, int>, const FirstFrameQuery*> by_instance;
  for (const auto& q : queries) {
    if (!categories.contains(q.label)) {
      fail(ErrorKind::integrity, "query " + q.video_id + "#" + std::to_string(q.instance_id) +
                                     ": unknown category " + std::to_string(q.label));
    }
    if (!by_instance.emplace(std::make_pair(q.video_id, q.instance_id), &q).second) {
      fail(ErrorKind::integrity, "duplicate query " + q.video_id + "#" + std::to_string(q.instance_id));
    }
  }

  std::vector<const TrackRecord*> ordered;
  ordered.reserve(tracks.size());
  for (const auto& t : tracks) {
    if (!by_instance.count({t.video_id, t.instance_id})) {
      fail(ErrorKind::integrity, "track record for video '" + t.video_id + "' frame " +
                                     std::to_string(t.frame_index) + " has orphan instance_id " +
                                     std::to_string(t.instance_id));
    }
    ordered.push_back(&t);
  }
  auto key = [](const TrackRecord* t) { return std::tie(t->video_id, t->frame_index, t->instance_id); };
  std::stable_sort(ordered.begin(), ordered.end(), [&](auto* a, auto* b) { return key(a) < key(b); });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (key(ordered[i - 1]) == key(ordered[i])) {
      const auto* t = ordered[i];
      fail(ErrorKind::integrity, "duplicate track record (video '" + t->video_id + "', frame " +
                                     std::to_string(t->frame_index) + ", instance " + std::to_string(t->instance_id) + ")");
    }
  }

  DatasetStore store;
  store.categories = categories;
  store.split_tag = opts.split_tag;
  std::int64_t next_id = 1;
  for (const auto* t : ordered) {
    const auto image_id = frame_image_id(t->video_id, t->frame_index);
    if (store.images.empty() || store.images.back().id != image_id) {
      ImageRecord img;
      img.id = image_id;
      img.file_name = image_id + ".jpg";
      img.dims = opts.frame_dims;
      img.meta.video_id = t->video_id;
      img.meta.frame_index = t->frame_index;
      store.images.push_back(std::move(img));
    }
    Annotation a;
    a.id = next_id++;
    a.image_id = image_id;
    a.category_id = by_instance.at({t->video_id, t->instance_id})->label;
    a.box = t->box;
    if (opts.frame_dims) {
      auto clipped = clip(t->box, *opts.frame_dims);
      if (!clipped) fail(ErrorKind::validation, "track record in '" + image_id + "' lies outside the frame");
      a.box = *clipped;
    }
    a.score = t->score;
    a.provenance = Provenance::pseudo;
    store.annotations.push_back(std::move(a));
  }
  validate(store);
  return store;
}

using FrameCandidates = std::map<int, std::vector<BoundingBox>>;

/// Deterministic stand-in tracker for one video. Frame 0 emits the query
/// boxes. On each later frame, live tracks and candidate boxes are paired
/// greedily by descending IoU (ties: lower track, then lower candidate index),
/// accepting pairs with IoU >= oracle_match_min_iou; each candidate is used at
/// most once and unmatched tracks end. A frame missing from `candidates` ends
/// every track.
inline std::vector<TrackRecord> greedy_iou_propagate(const std::vector<FirstFrameQuery>& queries,
                                                     const FrameCandidates& candidates,
                                                     const PropagationConfig& cfg) {
  cfg.validate();
  struct Live {
    const FirstFrameQuery* query;
    BoundingBox box;
  };
  std::vector<TrackRecord> out;
  std::vector<Live> live;
  for (const auto& q : queries) {
    if (!queries.empty() && q.video_id != queries.front().video_id) {
      fail(ErrorKind::validation, "greedy_iou_propagate: queries span several videos");
    }
    live.push_back({&q, q.box});
    out.push_back({q.video_id, 0, q.instance_id, q.box, q.label, q.score});
  }
  const int last_frame = candidates.empty() ? 0 : candidates.rbegin()->first;
  for (int frame = 1; frame <= last_frame && !live.empty(); ++frame) {
    auto it = candidates.find(frame);
    if (it == candidates.end()) break;
    const auto& cands = it->second;

    struct Pair {
      double iou;
      std::size_t track;
      std::size_t cand;
    };
    std::vector<Pair> pairs;
    for (std::size_t t = 0; t < live.size(); ++t) {
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const double v = iou(live[t].box, cands[c]);
        if (v >= cfg.oracle_match_min_iou) pairs.push_back({v, t, c});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      if (a.track != b.track) return a.track < b.track;
      return a.cand < b.cand;
    });
    std::vector<bool> track_done(live.size(), false);
    std::vector<bool> cand_used(cands.size(), false);
    std::vector<std::optional<std::size_t>> match(live.size());
    for (const auto& p : pairs) {
      if (track_done[p.track] || cand_used[p.cand]) continue;
      track_done[p.track] = true;
      cand_used[p.cand] = true;
      match[p.track] = p.cand;
    }
    std::vector<Live> next;
    for (std::size_t t = 0; t < live.size(); ++t) {
      if (!match[t]) continue;
      const auto& q = *live[t].query;
      const auto& box = cands[*match[t]];
      out.push_back({q.video_id, frame, q.instance_id, box, q.label, q.score});
      next.push_back({live[t].query, box});
    }
    live = std::move(next);
  }
  return out;
}

/// Candidate stream: one class-agnostic box per line
/// (`video_id`, `frame_index`, `x`, `y`, `w`, `h`).
inline std::map<std::string, FrameCandidates> read_candidate_stream(std::istream& in, const std::string& source) {
  std::map<std::string, FrameCandidates> out;
  for_each_record(in, source, [&](const Json& j, std::size_t line) {
    const std::string ctx = source + ":" + std::to_string(line);
    const auto video = field::get_string(j, "video_id", ctx);
    const auto frame = static_cast<int>(field::get_int(j, "frame_index", ctx));
    if (frame < 0) fail(ErrorKind::validation, ctx + ": frame_index must be >= 0");
    BoundingBox b{field::get_number(j, "x", ctx), field::get_number(j, "y", ctx), field::get_number(j, "w", ctx),
                  field::get_number(j, "h", ctx)};
    require_well_formed(b, ctx);
    out[video][frame].push_back(b);
  });
  return out;
}

/// Runs the stand-in tracker video by video (videos in id order).
inline std::vector<TrackRecord> propagate_all(const std::vector<FirstFrameQuery>& queries,
                                              const std::map<std::string, FrameCandidates>& candidates,
                                              const PropagationConfig& cfg) {
  std::map<std::string, std::vector<FirstFrameQuery>> per_video;
  for (const auto& q : queries) per_video[q.video_id].push_back(q);
  static const FrameCandidates kNone;
  std::vector<TrackRecord> out;
  for (const auto& [video, qs] : per_video) {
    auto it = candidates.find(video);
    auto tracks = greedy_iou_propagate(qs, it == candidates.end() ? kNone : it->second, cfg);
    out.insert(out.end(), tracks.begin(), tracks.end());
  }
  return out;
}

/// Share of reference track records reproduced under a consistent identity.
/// Each reference instance is mapped to the produced instance overlapping it
/// best on frame 0; a reference record counts when that produced instance has
/// a box with IoU >= `min_iou` on the same frame.
inline double identity_preservation(const std::vector<TrackRecord>& reference,
                                    const std::vector<TrackRecord>& produced, double min_iou = 0.5) {
  if (reference.empty()) return 1.0;
  std::map<std::tuple<std::string, int, int>, BoundingBox> produced_at;
  for (const auto& t : produced) produced_at[{t.video_id, t.frame_index, t.instance_id}] = t.box;

  std::map<std::pair<std::string, int>, int> mapping;
  for (const auto& r : reference) {
    if (r.frame_index != 0) continue;
    double best = min_iou;
    std::optional<int> best_id;
    for (const auto& p : produced) {
      if (p.video_id != r.video_id || p.frame_index != 0) continue;
      const double v = iou(r.box, p.box);
      if (v >= best && (!best_id || v > best)) {
        best = v;
        best_id = p.instance_id;
      }
    }
    if (best_id) mapping[{r.video_id, r.instance_id}] = *best_id;
  }
  std::size_t hits = 0;
  for (const auto& r : reference) {
    auto m = mapping.find({r.video_id, r.instance_id});
    if (m == mapping.end()) continue;
    auto p = produced_at.find({r.video_id, r.frame_index, m->second});
    if (p != produced_at.end() && iou(p->second, r.box) >= min_iou) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reference.size());
}

/// Fraction of frames that did not need manual annotation.
inline double cost_report(long long n_manually_annotated_frames, long long n_total_frames) {
  if (n_total_frames <= 0) fail(ErrorKind::validation, "cost report: total frame count must be > 0");
  if (n_manually_annotated_frames < 0 || n_manually_annotated_frames > n_total_frames) {
    fail(ErrorKind::validation, "cost report: manual frame count must lie in [0, total]");
  }
  return 1.0 - static_cast<double>(n_manually_annotated_frames) / static_cast<double>(n_total_frames);
}

}  // namespace bakelabel
