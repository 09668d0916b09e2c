#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bakelabel/error.hpp"
#include "bakelabel/geometry.hpp"
#include "bakelabel/interchange.hpp"
#include "bakelabel/io.hpp"
#include "bakelabel/parallel.hpp"

namespace bakelabel {

/// COCO-style thresholds 0.50, 0.55, ..., 0.95.
inline std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back(static_cast<double>(50 + 5 * k) / 100.0);
  return t;
}

struct EvalConfig {
  std::vector<double> iou_thresholds = coco_iou_thresholds();
  double pr_iou = 0.75;
  double pr_score_cutoff = 0.5;
  bool pr_score_cutoff_is_default = true;
  bool exclude_fallback_from_cap_range = true;
  std::optional<double> nms_iou;  // unset: predictions are evaluated as given
  bool nms_class_agnostic = true;

  void validate() const {
    if (iou_thresholds.empty()) fail(ErrorKind::validation, "eval config: no IoU thresholds");
    for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
      const double t = iou_thresholds[i];
      if (!(t > 0.0 && t < 1.0)) fail(ErrorKind::validation, "eval config: IoU thresholds must lie in (0, 1)");
      if (i > 0 && !(t > iou_thresholds[i - 1])) {
        fail(ErrorKind::validation, "eval config: IoU thresholds must be strictly increasing");
      }
    }
    if (!(pr_iou > 0.0 && pr_iou < 1.0)) fail(ErrorKind::validation, "eval config: pr_iou must lie in (0, 1)");
    if (!is_unit_interval(pr_score_cutoff)) fail(ErrorKind::validation, "eval config: pr_score_cutoff outside [0, 1]");
    if (nms_iou && !(*nms_iou > 0.0 && *nms_iou < 1.0)) {
      fail(ErrorKind::validation, "eval config: nms_iou must lie in (0, 1)");
    }
  }

  Json to_json() const {
    Json j{{"iou_thresholds", iou_thresholds},
           {"pr_iou", pr_iou},
           {"pr_score_cutoff", pr_score_cutoff},
           {"exclude_fallback_from_cap_range", exclude_fallback_from_cap_range},
           {"nms_class_agnostic", nms_class_agnostic}};
    j["nms_iou"] = nms_iou ? Json(*nms_iou) : Json(nullptr);
    return j;
  }
};

/// A box taking part in evaluation. Ground truth ignores `score`.
struct EvalBox {
  std::string image_id;
  BoundingBox box;
  CategoryId label = 0;
  double score = 1.0;

  bool operator==(const EvalBox&) const = default;
};

/// Annotations as predictions: `predicted` ones keep their score (1.0 if
/// absent); manual, weak and pseudo annotations count as score 1.0.
inline std::vector<EvalBox> predictions_from(const DatasetStore& store) {
  std::vector<EvalBox> out;
  out.reserve(store.annotations.size());
  for (const auto& a : store.annotations) {
    const double s = a.provenance == Provenance::predicted ? a.score.value_or(1.0) : 1.0;
    out.push_back({a.image_id, a.box, a.category_id, s});
  }
  return out;
}

inline std::vector<EvalBox> predictions_from(const std::vector<DetectionRecord>& records) {
  std::vector<EvalBox> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.detection.label) {
      fail(ErrorKind::validation, "prediction " + std::to_string(i) + " on '" + r.image_id + "' has no label");
    }
    out.push_back({r.image_id, r.detection.box, *r.detection.label, r.detection.score});
  }
  return out;
}

inline std::vector<EvalBox> ground_truth_from(const DatasetStore& store) {
  std::vector<EvalBox> out;
  out.reserve(store.annotations.size());
  for (const auto& a : store.annotations) out.push_back({a.image_id, a.box, a.category_id, 1.0});
  return out;
}

/// Prediction indices in evaluation order: descending score, then image id,
/// box, label, and input position.
inline std::vector<std::size_t> rank_order(const std::vector<EvalBox>& preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = preds[a];
    const auto& pb = preds[b];
    if (pa.score != pb.score) return pa.score > pb.score;
    return std::tie(pa.image_id, pa.box, pa.label) < std::tie(pb.image_id, pb.box, pb.label);
  });
  return order;
}

struct Matching {
  std::vector<std::optional<std::size_t>> pred_to_gt;  // indexed like the predictions
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

/// One-to-one greedy matching. Predictions are visited in rank order; each
/// takes the unmatched ground-truth box of the same image (and same class,
/// unless `class_agnostic`) with the highest IoU, provided IoU >= threshold.
/// IoU ties go to the earlier ground-truth box.
inline Matching match_detections(const std::vector<EvalBox>& preds, const std::vector<EvalBox>& gts,
                                 double iou_threshold, bool class_agnostic = false) {
  std::unordered_map<std::string, std::vector<std::size_t>> gts_by_image;
  for (std::size_t g = 0; g < gts.size(); ++g) gts_by_image[gts[g].image_id].push_back(g);

  Matching m;
  m.pred_to_gt.assign(preds.size(), std::nullopt);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t p : rank_order(preds)) {
    auto it = gts_by_image.find(preds[p].image_id);
    if (it == gts_by_image.end()) continue;
    double best = -1.0;
    std::optional<std::size_t> best_g;
    for (std::size_t g : it->second) {
      if (taken[g] || (!class_agnostic && gts[g].label != preds[p].label)) continue;
      const double v = iou(preds[p].box, gts[g].box);
      if (v >= iou_threshold && v > best) {
        best = v;
        best_g = g;
      }
    }
    if (best_g) {
      taken[*best_g] = true;
      m.pred_to_gt[p] = best_g;
    }
  }
  m.true_positives = static_cast<std::size_t>(
      std::count_if(m.pred_to_gt.begin(), m.pred_to_gt.end(), [](const auto& v) { return v.has_value(); }));
  m.false_positives = preds.size() - m.true_positives;
  m.false_negatives = gts.size() - m.true_positives;
  return m;
}

inline constexpr int kRecallPoints = 101;

/// 101-point interpolated AP from hit flags listed in rank order.
inline double interpolated_ap(const std::vector<bool>& hits_in_rank_order, std::size_t n_gt) {
  const std::size_t n = hits_in_rank_order.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (hits_in_rank_order[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // Precision envelope: max precision at any recall >= this point's recall.
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

  double sum = 0.0;
  for (int i = 0; i < kRecallPoints; ++i) {
    const double r = static_cast<double>(i) / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / kRecallPoints;
}

/// AP of one category (or of all boxes with labels ignored when `category` is
/// empty) at one IoU threshold. Empty when there is no ground truth to recall.
inline std::optional<double> average_precision(const std::vector<EvalBox>& preds, const std::vector<EvalBox>& gts,
                                               std::optional<CategoryId> category, double iou_threshold) {
  std::vector<EvalBox> p;
  std::vector<EvalBox> g;
  for (const auto& b : preds) {
    if (!category || b.label == *category) p.push_back(b);
  }
  for (const auto& b : gts) {
    if (!category || b.label == *category) g.push_back(b);
  }
  if (g.empty()) return std::nullopt;
  const auto m = match_detections(p, g, iou_threshold, /*class_agnostic=*/true);
  std::vector<bool> hits;
  hits.reserve(p.size());
  for (std::size_t i : rank_order(p)) hits.push_back(m.pred_to_gt[i].has_value());
  return interpolated_ap(hits, g.size());
}

struct PrecisionRecall {
  std::optional<double> precision;  // empty when no prediction passes the cutoff
  std::optional<double> recall;     // empty when there is no ground truth
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Class-aware P/R at `pr_iou` over predictions scoring at least `pr_score_cutoff`.
inline PrecisionRecall precision_recall(const std::vector<EvalBox>& preds, const std::vector<EvalBox>& gts,
                                        const EvalConfig& cfg) {
  std::vector<EvalBox> kept;
  for (const auto& p : preds) {
    if (p.score >= cfg.pr_score_cutoff) kept.push_back(p);
  }
  const auto m = match_detections(kept, gts, cfg.pr_iou, false);
  PrecisionRecall pr;
  pr.tp = m.true_positives;
  pr.fp = m.false_positives;
  pr.fn = m.false_negatives;
  if (pr.tp + pr.fp > 0) pr.precision = static_cast<double>(pr.tp) / static_cast<double>(pr.tp + pr.fp);
  if (pr.tp + pr.fn > 0) pr.recall = static_cast<double>(pr.tp) / static_cast<double>(pr.tp + pr.fn);
  return pr;
}

struct EvalReport {
  double map = 0.0;
  std::vector<std::pair<double, double>> per_iou_ap;  // threshold -> AP averaged over classes
  std::map<CategoryId, double> per_class_ap;          // class -> AP averaged over thresholds
  std::optional<std::pair<double, double>> cap_range;
  double aap = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::map<double, std::optional<double>> per_angle;
  std::map<std::string, std::optional<double>> per_subset;
};

/// mAP over classes with ground truth, each class averaged over the IoU
/// thresholds; aAP is the same computation with labels erased. Also fills
/// per-threshold and per-class AP and the class AP range (fallback class
/// excluded when configured).
inline EvalReport map_coco(const std::vector<EvalBox>& preds, const std::vector<EvalBox>& gts,
                           const CategoryTable& categories, const EvalConfig& cfg, unsigned jobs = 1) {
  cfg.validate();
  if (gts.empty()) fail(ErrorKind::validation, "evaluation: ground truth is empty");

  std::set<CategoryId> classes;
  for (const auto& g : gts) classes.insert(g.label);
  std::vector<std::optional<CategoryId>> targets(classes.begin(), classes.end());
  targets.push_back(std::nullopt);  // class-agnostic row

  const std::size_t n_thr = cfg.iou_thresholds.size();
  std::vector<double> ap(targets.size() * n_thr, 0.0);
  parallel_for(ap.size(), jobs, [&](std::size_t cell) {
    const auto& target = targets[cell / n_thr];
    ap[cell] = *average_precision(preds, gts, target, cfg.iou_thresholds[cell % n_thr]);
  });

  EvalReport rep;
  const std::size_t n_cls = classes.size();
  for (std::size_t t = 0; t < n_thr; ++t) {
    double s = 0.0;
    for (std::size_t c = 0; c < n_cls; ++c) s += ap[c * n_thr + t];
    rep.per_iou_ap.emplace_back(cfg.iou_thresholds[t], s / static_cast<double>(n_cls));
  }
  double total = 0.0;
  for (std::size_t c = 0; c < n_cls; ++c) {
    double s = 0.0;
    for (std::size_t t = 0; t < n_thr; ++t) s += ap[c * n_thr + t];
    const double cls_ap = s / static_cast<double>(n_thr);
    rep.per_class_ap[*targets[c]] = cls_ap;
    total += cls_ap;
  }
  rep.map = total / static_cast<double>(n_cls);
  double agn = 0.0;
  for (std::size_t t = 0; t < n_thr; ++t) agn += ap[n_cls * n_thr + t];
  rep.aap = agn / static_cast<double>(n_thr);

  const auto fallback = categories.fallback();
  for (const auto& [cls, value] : rep.per_class_ap) {
    if (cfg.exclude_fallback_from_cap_range && fallback && cls == *fallback) continue;
    if (!rep.cap_range) {
      rep.cap_range = std::make_pair(value, value);
    } else {
      rep.cap_range->first = std::min(rep.cap_range->first, value);
      rep.cap_range->second = std::max(rep.cap_range->second, value);
    }
  }
  return rep;
}

inline std::vector<EvalBox> restrict_to_images(const std::vector<EvalBox>& boxes, const std::set<std::string>& ids) {
  std::vector<EvalBox> out;
  for (const auto& b : boxes) {
    if (ids.count(b.image_id)) out.push_back(b);
  }
  return out;
}

/// Per-image NMS over predictions, labels respected unless class-agnostic.
inline std::vector<EvalBox> suppress_per_image(const std::vector<EvalBox>& preds, double iou_threshold,
                                               bool class_agnostic) {
  std::map<std::string, std::vector<Detection>> per_image;
  for (const auto& p : preds) per_image[p.image_id].push_back({p.box, p.score, p.label, ""});
  std::vector<EvalBox> out;
  for (auto& [image, dets] : per_image) {
    for (auto& d : nms(std::move(dets), iou_threshold, class_agnostic)) {
      out.push_back({image, d.box, *d.label, d.score});
    }
  }
  return out;
}

/// mAP per exact camera angle. Every ground-truth image must carry an angle;
/// an angle whose images hold no ground truth reports no value.
inline std::map<double, std::optional<double>> angle_report(const std::vector<EvalBox>& preds,
                                                            const DatasetStore& gt, const EvalConfig& cfg) {
  std::map<double, std::set<std::string>> groups;
  for (const auto& img : gt.images) {
    if (!img.meta.camera_angle_deg) {
      fail(ErrorKind::validation, "angle report: image '" + img.id + "' has no camera angle");
    }
    groups[*img.meta.camera_angle_deg].insert(img.id);
  }
  const auto gts = ground_truth_from(gt);
  std::map<double, std::optional<double>> out;
  for (const auto& [angle, ids] : groups) {
    auto g = restrict_to_images(gts, ids);
    if (g.empty()) {
      out[angle] = std::nullopt;
      continue;
    }
    out[angle] = map_coco(restrict_to_images(preds, ids), g, gt.categories, cfg).map;
  }
  return out;
}

/// Full evaluation of predictions against a ground-truth store: optional NMS,
/// mAP/aAP/cAP, and the P/R operating point.
inline EvalReport evaluate(std::vector<EvalBox> preds, const DatasetStore& gt, const EvalConfig& cfg,
                           unsigned jobs = 1) {
  cfg.validate();
  auto images = index_images(gt);
  for (const auto& p : preds) {
    if (!images.count(p.image_id)) {
      fail(ErrorKind::integrity, "prediction references image '" + p.image_id + "' absent from ground truth");
    }
    if (!gt.categories.contains(p.label)) {
      fail(ErrorKind::integrity, "prediction on '" + p.image_id + "' has unknown label " + std::to_string(p.label));
    }
  }
  if (cfg.nms_iou) preds = suppress_per_image(preds, *cfg.nms_iou, cfg.nms_class_agnostic);
  const auto gts = ground_truth_from(gt);
  auto rep = map_coco(preds, gts, gt.categories, cfg, jobs);
  const auto pr = precision_recall(preds, gts, cfg);
  rep.precision = pr.precision;
  rep.recall = pr.recall;
  rep.tp = pr.tp;
  rep.fp = pr.fp;
  rep.fn = pr.fn;
  return rep;
}

// ---------------------------------------------------------------------------
// Significance testing
// ---------------------------------------------------------------------------

struct ZTest {
  double z = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

/// Two-sided pooled two-proportion z-test.
inline ZTest proportion_z_test(long long successes_a, long long n_a, long long successes_b, long long n_b,
                               double alpha = 0.05) {
  if (n_a <= 0 || n_b <= 0) fail(ErrorKind::validation, "z-test: sample sizes must be > 0");
  if (successes_a < 0 || successes_a > n_a || successes_b < 0 || successes_b > n_b) {
    fail(ErrorKind::validation, "z-test: successes must lie in [0, n]");
  }
  const double pa = static_cast<double>(successes_a) / static_cast<double>(n_a);
  const double pb = static_cast<double>(successes_b) / static_cast<double>(n_b);
  const double pooled = static_cast<double>(successes_a + successes_b) / static_cast<double>(n_a + n_b);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n_a) + 1.0 / static_cast<double>(n_b)));
  ZTest t;
  if (se == 0.0) return t;  // both samples all-success or all-failure
  t.z = (pa - pb) / se;
  t.p_value = std::erfc(std::abs(t.z) / std::sqrt(2.0));
  t.significant = t.p_value < alpha;
  return t;
}

// ---------------------------------------------------------------------------
// Embedding similarity
// ---------------------------------------------------------------------------

struct EmbeddingEntry {
  std::string name;
  std::vector<double> vector;
};

struct EmbeddingSet {
  std::vector<EmbeddingEntry> entries;

  void validate() const {
    if (entries.empty()) return;
    const auto dim = entries.front().vector.size();
    if (dim == 0) fail(ErrorKind::validation, "embeddings: empty vector");
    for (const auto& e : entries) {
      if (e.vector.size() != dim) fail(ErrorKind::validation, "embeddings: '" + e.name + "' has a different dimension");
      double norm = 0.0;
      for (double v : e.vector) {
        if (!std::isfinite(v)) fail(ErrorKind::validation, "embeddings: '" + e.name + "' is not finite");
        norm += v * v;
      }
      if (norm == 0.0) fail(ErrorKind::validation, "embeddings: '" + e.name + "' is a zero vector");
    }
  }
};

/// Line-delimited `{"name": ..., "vector": [...]}` records.
inline EmbeddingSet read_embedding_stream(std::istream& in, const std::string& source) {
  EmbeddingSet set;
  for_each_record(in, source, [&](const Json& j, std::size_t line) {
    const std::string ctx = source + ":" + std::to_string(line);
    EmbeddingEntry e;
    e.name = field::get_string(j, "name", ctx);
    const Json& v = field::require(j, "vector", ctx);
    if (!v.is_array()) fail(ErrorKind::schema, ctx + ": 'vector' must be an array");
    for (const auto& x : v) e.vector.push_back(field::get_number(x, ctx + ": vector element"));
    set.entries.push_back(std::move(e));
  });
  set.validate();
  return set;
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Mean over entries of the mean cosine similarity to their k most similar
/// other entries.
inline double topk_avg_cosine(const EmbeddingSet& set, std::size_t k) {
  set.validate();
  const std::size_t n = set.entries.size();
  if (k == 0 || k >= n) fail(ErrorKind::validation, "top-k similarity: k must lie in [1, n)");
  std::vector<std::vector<double>> unit;
  unit.reserve(n);
  for (const auto& e : set.entries) {
    double norm = 0.0;
    for (double v : e.vector) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<double> u(e.vector.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = e.vector[i] / norm;
    unit.push_back(std::move(u));
  }
  double total = 0.0;
  std::vector<double> sims;
  for (std::size_t i = 0; i < n; ++i) {
    sims.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (std::size_t d = 0; d < unit[i].size(); ++d) dot += unit[i][d] * unit[j][d];
      sims.push_back(dot);
    }
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(), std::greater<>());
    total += std::accumulate(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), 0.0) / static_cast<double>(k);
  }
  return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json report_to_json(const EvalReport& r, const CategoryTable& categories) {
  Json j;
  j["map"] = r.map;
  j["aap"] = r.aap;
  Json per_iou = Json::object();
  for (const auto& [t, ap] : r.per_iou_ap) per_iou[format_fixed(t, 2)] = ap;
  j["per_iou_ap"] = per_iou;
  Json per_class = Json::object();
  for (const auto& [cls, ap] : r.per_class_ap) {
    const auto idx = categories.index_of(cls);
    per_class[idx ? categories.entries()[*idx].name : std::to_string(cls)] = ap;
  }
  j["per_class_ap"] = per_class;
  j["cap_range"] = r.cap_range ? Json::array({r.cap_range->first, r.cap_range->second}) : Json(nullptr);
  j["precision"] = optional_json(r.precision);
  j["recall"] = optional_json(r.recall);
  j["counts"] = Json{{"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}};
  if (!r.per_angle.empty()) {
    Json a = Json::object();
    for (const auto& [deg, v] : r.per_angle) a[format_double(deg)] = optional_json(v);
    j["per_angle"] = a;
  }
  if (!r.per_subset.empty()) {
    Json s = Json::object();
    for (const auto& [tag, v] : r.per_subset) s[tag] = optional_json(v);
    j["per_subset"] = s;
  }
  return j;
}

/// Flat "facet,key,value" rows; undefined values are left empty.
inline std::string report_to_csv(const EvalReport& r, const CategoryTable& categories) {
  std::string out = "facet,key,value\n";
  auto row = [&out](const std::string& facet, const std::string& key, const std::optional<double>& v) {
    std::string k = key;
    if (k.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char c : k) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
      k = q + "\"";
    }
    out += facet + "," + k + "," + (v ? format_double(*v) : std::string()) + "\n";
  };
  row("map", "", r.map);
  row("aap", "", r.aap);
  for (const auto& [t, ap] : r.per_iou_ap) row("per_iou_ap", format_fixed(t, 2), ap);
  for (const auto& [cls, ap] : r.per_class_ap) {
    const auto idx = categories.index_of(cls);
    row("per_class_ap", idx ? categories.entries()[*idx].name : std::to_string(cls), ap);
  }
  if (r.cap_range) {
    row("cap_range", "min", r.cap_range->first);
    row("cap_range", "max", r.cap_range->second);
  }
  row("precision", "", r.precision);
  row("recall", "", r.recall);
  row("counts", "tp", static_cast<double>(r.tp));
  row("counts", "fp", static_cast<double>(r.fp));
  row("counts", "fn", static_cast<double>(r.fn));
  for (const auto& [deg, v] : r.per_angle) row("per_angle", format_double(deg), v);
  for (const auto& [tag, v] : r.per_subset) row("per_subset", tag, v);
  return out;
}

}  // namespace bakelabel
