// bakelabel: command-line front end for the weak/pseudo annotation toolkit.
//
// Exit codes: 0 success, 1 invalid input or usage, 2 I/O failure.
// Every command validates all inputs and computes all results before it
// writes any output file.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "bakelabel/bakelabel.hpp"

namespace fs = std::filesystem;
using namespace bakelabel;

namespace {

ImageDims parse_size(const std::string& text) {
  int w = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X') || w <= 0 || h <= 0) {
    fail(ErrorKind::validation, "bad size '" + text + "' (expected WIDTHxHEIGHT)");
  }
  return {w, h};
}

std::string pct(double v) { return format_fixed(100.0 * v, 2) + "%"; }
std::string f3(double v) { return format_fixed(v, 3); }
std::string f3(const std::optional<double>& v) { return v ? format_fixed(*v, 3) : std::string("n/a"); }

bool is_stream_path(const fs::path& p) { return p.extension() == ".jsonl"; }

std::vector<EvalBox> load_predictions(const fs::path& path) {
  if (is_stream_path(path)) return predictions_from(load_detection_stream(path));
  return predictions_from(load_dataset(path));
}

/// Writes all (path, content) pairs; called only once every result exists.
void write_all(const std::vector<std::pair<fs::path, std::string>>& files) {
  for (const auto& [path, content] : files) write_text_file(path, content);
}

// ---------------------------------------------------------------------------

struct FilterFlags {
  FilterConfig cfg;
  bool pass_through = false;

  void add(CLI::App* app) {
    app->add_option("--background-area-fraction", cfg.background_area_fraction,
                    "remove boxes covering at least this image fraction")
        ->capture_default_str();
    app->add_option("--duplicate-iou", cfg.duplicate_iou, "remove lower-ranked boxes above this IoU")
        ->capture_default_str();
    app->add_option("--containment-capture", cfg.containment_capture, "capture rate above which a box is contained")
        ->capture_default_str();
    app->add_option("--crowd-min-contained", cfg.crowd_min_contained,
                    "remove boxes containing at least this many others")
        ->capture_default_str();
    app->add_flag("--pass-through", pass_through, "disable every stage (thresholds that cannot fire)");
  }

  FilterConfig effective() const {
    auto c = pass_through ? FilterConfig::pass_through() : cfg;
    c.validate();
    return c;
  }
};

struct Common {
  unsigned jobs = default_jobs();
  void add(CLI::App* app) {
    app->add_option("--jobs", jobs, "worker threads (default: BAKELABEL_JOBS or hardware concurrency)")
        ->check(CLI::PositiveNumber);
  }
};

// ---------------------------------------------------------------------------
// filter
// ---------------------------------------------------------------------------

struct FilterCmd {
  fs::path detections, images, out, trace;
  std::string image_size;
  FilterFlags flags;
  Common common;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("filter", "run the four-stage cleanup on class-agnostic detections");
    c->add_option("--detections", detections, "detection stream (.jsonl)")->required();
    auto* img = c->add_option("--images", images, "dataset document supplying image sizes");
    c->add_option("--image-size", image_size, "one size for every image, WIDTHxHEIGHT")->excludes(img);
    c->add_option("--out", out, "kept detections (.jsonl)")->required();
    c->add_option("--trace", trace, "removed detections with their stage (.jsonl)");
    flags.add(c);
    common.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    const auto cfg = flags.effective();
    const auto records = load_detection_stream(detections);
    std::unordered_map<std::string, ImageDims> dims;
    std::optional<ImageDims> uniform;
    if (!image_size.empty()) {
      uniform = parse_size(image_size);
    } else if (!images.empty()) {
      for (const auto& img : load_dataset(images).images) {
        if (img.dims) dims.emplace(img.id, *img.dims);
      }
    } else {
      fail(ErrorKind::validation, "filter: need --images or --image-size");
    }

    std::map<std::string, std::vector<Detection>> per_image;
    for (const auto& r : records) per_image[r.image_id].push_back(r.detection);
    std::vector<std::string> ids;
    std::vector<std::vector<Detection>> inputs;
    std::vector<ImageDims> sizes;
    for (auto& [id, dets] : per_image) {
      ImageDims d;
      if (uniform) {
        d = *uniform;
      } else {
        auto it = dims.find(id);
        if (it == dims.end()) fail(ErrorKind::integrity, "filter: no size known for image '" + id + "'");
        d = it->second;
      }
      for (auto& det : dets) {
        auto c = clip(det.box, d);
        if (!c) fail(ErrorKind::validation, "filter: detection on '" + id + "' lies outside the image");
        det.box = *c;
      }
      ids.push_back(id);
      inputs.push_back(std::move(dets));
      sizes.push_back(d);
    }
    std::vector<FilterTrace> traces(ids.size());
    parallel_for(ids.size(), common.jobs, [&](std::size_t i) { traces[i] = apply_pipeline(inputs[i], sizes[i], cfg); });

    std::vector<DetectionRecord> kept;
    std::string trace_text = dump_line(Json{{"header", Json{{"filter_config", cfg.to_json()}}}});
    std::map<FilterStage, std::size_t> per_stage;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (const auto& d : traces[i].kept) kept.push_back({ids[i], d});
      for (const auto& r : traces[i].removed) {
        ++per_stage[r.stage];
        auto j = detection_to_json({ids[i], r.detection});
        j["stage"] = to_string(r.stage);
        trace_text += dump_line(j);
      }
    }
    std::vector<std::pair<fs::path, std::string>> files;
    files.emplace_back(out, render_detection_stream(kept, Json{{"filter_config", cfg.to_json()}}));
    if (!trace.empty()) files.emplace_back(trace, trace_text);
    write_all(files);

    std::size_t removed = 0;
    for (const auto& [s, n] : per_stage) removed += n;
    std::cout << "images " << ids.size() << ", detections " << records.size() << ", kept " << kept.size()
              << ", removed " << removed << "\n";
    for (auto s : {FilterStage::background, FilterStage::duplicate, FilterStage::crowd, FilterStage::nested}) {
      std::cout << "  " << to_string(s) << ": " << (per_stage.count(s) ? per_stage[s] : 0) << "\n";
    }
  }
};

// ---------------------------------------------------------------------------
// weaklabel
// ---------------------------------------------------------------------------

struct WeakCmd {
  fs::path images, detections, out;
  std::string format = "coco";
  FilterFlags flags;
  Common common;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("weaklabel", "build weak annotations from single-class images");
    c->add_option("--images", images, "dataset document with image-level labels and sizes")->required();
    c->add_option("--detections", detections, "class-agnostic detection stream (.jsonl)")->required();
    c->add_option("--out", out, "output dataset (file for coco, directory for yolo)")->required();
    c->add_option("--format", format, "output format")->check(CLI::IsMember({"coco", "yolo"}))->capture_default_str();
    flags.add(c);
    common.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    const auto cfg = flags.effective();
    const auto manifest = load_dataset(images);
    const auto dets = load_detection_stream(detections);
    auto res = build_weak_dataset(manifest.images, dets, manifest.categories, cfg, common.jobs);
    const auto violations = validate_single_class(res.store);
    if (!violations.empty()) {
      for (const auto& v : violations) std::cerr << "purity: image '" << v.image_id << "': " << v.message << "\n";
      fail(ErrorKind::validation, "weaklabel: " + std::to_string(violations.size()) + " image(s) violate purity");
    }
    save_dataset(res.store, out, format == "yolo" ? DatasetFormat::yolo_like : DatasetFormat::coco_like);

    std::set<CategoryId> populated;
    for (const auto& a : res.store.annotations) populated.insert(a.category_id);
    std::cout << "images " << res.store.images.size() << ", annotations " << res.store.annotations.size()
              << ", classes populated " << populated.size() << "\n";
    for (auto s : {FilterStage::background, FilterStage::duplicate, FilterStage::crowd, FilterStage::nested}) {
      std::cout << "  removed " << to_string(s) << ": "
                << (res.removed_per_stage.count(s) ? res.removed_per_stage.at(s) : 0) << "\n";
    }
    std::cout << "purity violations: 0\n";
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  }
};

// ---------------------------------------------------------------------------
// propagate
// ---------------------------------------------------------------------------

struct PropagateCmd {
  fs::path queries, tracks, candidates, categories, out, tracks_out, truth;
  std::string frame_size, split_tag;
  PropagationConfig cfg;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("propagate", "turn first-frame queries and tracks into pseudo annotations");
    c->add_option("--queries", queries, "first-frame query file (.jsonl)")->required();
    auto* t = c->add_option("--tracks", tracks, "tracker output stream (.jsonl)");
    auto* o = c->add_option("--candidates", candidates,
                            "per-frame candidate boxes; runs the built-in greedy IoU tracker")
                  ->excludes(t);
    t->excludes(o);
    c->add_option("--categories", categories, "dataset document whose categories to use (default: bakery taxonomy)");
    c->add_option("--out", out, "output dataset (.json)")->required();
    c->add_option("--tracks-out", tracks_out, "write the tracker output used (.jsonl)");
    c->add_option("--truth", truth, "reference track stream for an identity-preservation report");
    c->add_option("--frame-size", frame_size, "frame size WIDTHxHEIGHT; boxes are clipped to it");
    c->add_option("--split-tag", split_tag, "split tag stored in the output");
    c->add_option("--query-score-cutoff", cfg.query_score_cutoff, "minimum score of predicted queries")
        ->capture_default_str();
    c->add_option("--oracle-min-iou", cfg.oracle_match_min_iou, "minimum IoU for the greedy tracker")
        ->capture_default_str();
    c->callback([this] { run(); });
  }

  void run() {
    cfg.validate();
    if (tracks.empty() == candidates.empty()) fail(ErrorKind::validation, "propagate: give --tracks or --candidates");
    const auto cats = categories.empty() ? bakery_taxonomy() : load_dataset(categories).categories;
    std::istringstream qin(read_text_file(queries));
    const auto sel = select_query_records(read_query_stream(qin, queries.string()), cfg);

    std::vector<TrackRecord> produced;
    if (!tracks.empty()) {
      produced = load_track_stream(tracks);
    } else {
      std::istringstream cin_(read_text_file(candidates));
      produced = propagate_all(sel.queries, read_candidate_stream(cin_, candidates.string()), cfg);
    }
    IngestOptions opts;
    if (!frame_size.empty()) opts.frame_dims = parse_size(frame_size);
    if (!split_tag.empty()) opts.split_tag = split_tag;
    auto store = ingest_track_stream(produced, sel.queries, cats, opts);
    store.info["propagation"] = Json{{"query_score_cutoff", cfg.query_score_cutoff},
                                     {"oracle_match_min_iou", cfg.oracle_match_min_iou},
                                     {"tracker", tracks.empty() ? "greedy-iou" : "external"}};

    std::optional<double> identity;
    if (!truth.empty()) identity = identity_preservation(load_track_stream(truth), produced);

    std::set<std::string> manual_videos, all_videos;
    for (const auto& q : sel.queries) {
      if (q.origin == QueryOrigin::manual) manual_videos.insert(q.video_id);
    }
    for (const auto& img : store.images) all_videos.insert(*img.meta.video_id);
    const auto n_frames = static_cast<long long>(store.images.size());

    std::vector<std::pair<fs::path, std::string>> files;
    validate(store);
    files.emplace_back(out, serialize_dataset(store));
    if (!tracks_out.empty()) {
      files.emplace_back(tracks_out, render_track_stream(produced, store.info["propagation"]));
    }
    write_all(files);

    std::cout << "videos " << all_videos.size() << ", frames " << n_frames << ", pseudo annotations "
              << store.annotations.size() << "\n";
    std::cout << "queries " << sel.queries.size() << " (dropped " << sel.dropped << " below "
              << format_double(cfg.query_score_cutoff) << ")\n";
    if (n_frames > 0) {
      const auto manual = static_cast<long long>(manual_videos.size());
      std::cout << "annotation cost reduction: " << pct(cost_report(manual, n_frames)) << " (" << manual
                << " manually annotated frames of " << n_frames << ")\n";
    }
    if (identity) std::cout << "identity preserved: " << pct(*identity) << "\n";
  }
};

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalCmd {
  fs::path pred, gt, compare, report, csv;
  EvalConfig cfg;
  std::vector<double> thresholds;
  std::optional<double> score_cutoff;
  std::optional<double> nms_iou;
  bool class_aware_nms = false, include_fallback = false, angles = false, first_frame = false;
  double alpha = 0.05;
  Common common;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("eval", "COCO-style evaluation of predictions against ground truth");
    c->add_option("--pred", pred, "predictions: dataset (.json) or detection stream with labels (.jsonl)")->required();
    c->add_option("--gt", gt, "ground-truth dataset (.json)")->required();
    c->add_option("--iou-thresholds", thresholds, "IoU thresholds (default 0.50:0.05:0.95)")->delimiter(',');
    c->add_option("--pr-iou", cfg.pr_iou, "IoU of the precision/recall operating point")->capture_default_str();
    c->add_option("--score-cutoff", score_cutoff, "score cutoff of the precision/recall operating point (default 0.5)");
    c->add_option("--nms-iou", nms_iou, "apply per-image NMS to predictions first");
    c->add_flag("--class-aware-nms", class_aware_nms, "NMS only within one label");
    c->add_flag("--include-fallback-in-cap", include_fallback, "let the fallback class enter the class AP range");
    c->add_flag("--angle-report", angles, "mAP per camera angle");
    c->add_flag("--first-frame-subset", first_frame, "also report mAP on first frames only");
    c->add_option("--compare", compare, "second prediction set for a two-proportion z-test on recall");
    c->add_option("--alpha", alpha, "significance level of the z-test")->capture_default_str();
    c->add_option("--report", report, "write the report as JSON");
    c->add_option("--csv", csv, "write the report as CSV");
    common.add(c);
    c->callback([this] { run(); });
  }

  void run() {
    if (!thresholds.empty()) cfg.iou_thresholds = thresholds;
    if (score_cutoff) {
      cfg.pr_score_cutoff = *score_cutoff;
      cfg.pr_score_cutoff_is_default = false;
    }
    cfg.nms_iou = nms_iou;
    cfg.nms_class_agnostic = !class_aware_nms;
    cfg.exclude_fallback_from_cap_range = !include_fallback;
    cfg.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::validation, "eval: alpha must lie in (0, 1)");

    const auto truth = load_dataset(gt);
    auto preds = load_predictions(pred);
    auto rep = evaluate(preds, truth, cfg, common.jobs);
    if (cfg.nms_iou) preds = suppress_per_image(preds, *cfg.nms_iou, cfg.nms_class_agnostic);
    if (angles) rep.per_angle = angle_report(preds, truth, cfg);
    if (first_frame) {
      std::set<std::string> ids;
      for (const auto& img : truth.images) {
        if (img.meta.frame_index && *img.meta.frame_index == 0) ids.insert(img.id);
      }
      const auto g = restrict_to_images(ground_truth_from(truth), ids);
      rep.per_subset["all"] = rep.map;
      rep.per_subset["first_frame"] =
          g.empty() ? std::nullopt
                    : std::optional<double>(map_coco(restrict_to_images(preds, ids), g, truth.categories, cfg).map);
    }
    std::optional<EvalReport> other;
    std::optional<ZTest> z;
    if (!compare.empty()) {
      other = evaluate(load_predictions(compare), truth, cfg, common.jobs);
      const auto n = static_cast<long long>(rep.tp + rep.fn);
      z = proportion_z_test(static_cast<long long>(rep.tp), n, static_cast<long long>(other->tp), n, alpha);
    }

    Json doc{{"config", cfg.to_json()}, {"report", report_to_json(rep, truth.categories)}};
    if (z) {
      doc["comparison"] = Json{{"recall_a", optional_json(rep.recall)}, {"recall_b", optional_json(other->recall)},
                               {"z", z->z}, {"p_value", z->p_value}, {"alpha", alpha},
                               {"significant", z->significant}};
    }
    std::vector<std::pair<fs::path, std::string>> files;
    if (!report.empty()) files.emplace_back(report, dump_canonical(doc));
    if (!csv.empty()) files.emplace_back(csv, report_to_csv(rep, truth.categories));
    write_all(files);

    std::cout << "mAP " << f3(rep.map) << "\n";
    std::cout << "aAP " << f3(rep.aap) << "\n";
    if (rep.cap_range) std::cout << "cAP " << f3(rep.cap_range->first) << "-" << f3(rep.cap_range->second) << "\n";
    for (const auto& [t, ap] : rep.per_iou_ap) std::cout << "AP@" << format_fixed(t, 2) << " " << f3(ap) << "\n";
    std::cout << "precision " << f3(rep.precision) << " recall " << f3(rep.recall) << " (IoU "
              << format_double(cfg.pr_iou) << ", score >= " << format_double(cfg.pr_score_cutoff)
              << (cfg.pr_score_cutoff_is_default ? ", default cutoff" : "") << ")\n";
    if (!rep.per_angle.empty()) {
      std::cout << "angle  mAP\n";
      for (const auto& [a, v] : rep.per_angle) std::cout << format_double(a) << "  " << f3(v) << "\n";
    }
    for (const auto& [tag, v] : rep.per_subset) std::cout << "subset " << tag << " mAP " << f3(v) << "\n";
    if (z) {
      std::cout << "z-test on recall: " << f3(rep.recall) << " vs " << f3(other->recall) << ", z "
                << format_fixed(z->z, 3) << ", p " << format_fixed(z->p_value, 4) << ", "
                << (z->significant ? "significant" : "not significant") << " at alpha " << format_double(alpha)
                << "\n";
    }
  }
};

// ---------------------------------------------------------------------------
// split, convert, histogram, manifest, cost, similarity
// ---------------------------------------------------------------------------

struct SplitCmd {
  fs::path in, train_out, test_out;
  double fraction = 0.8;
  std::string group = "video";
  std::uint64_t seed = 0;
  bool allow_degenerate = false;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("split", "seeded grouped train/test split");
    c->add_option("--in", in, "input dataset (.json)")->required();
    c->add_option("--fraction", fraction, "share of groups in the train split")->capture_default_str();
    c->add_option("--group", group, "grouping key")->check(CLI::IsMember({"video", "image"}))->capture_default_str();
    c->add_option("--seed", seed, "shuffle seed")->capture_default_str();
    c->add_flag("--allow-degenerate", allow_degenerate, "permit an empty side");
    c->add_option("--train-out", train_out, "train dataset (.json)")->required();
    c->add_option("--test-out", test_out, "test dataset (.json)")->required();
    c->callback([this] { run(); });
  }

  void run() {
    const auto store = load_dataset(in);
    auto [train, test] = split_grouped(store, fraction, group == "video" ? GroupKey::video : GroupKey::image, seed,
                                       allow_degenerate);
    const Json cfg{{"fraction", fraction}, {"group", group}, {"seed", seed}};
    train.info["split"] = cfg;
    test.info["split"] = cfg;
    write_all({{train_out, serialize_dataset(train)}, {test_out, serialize_dataset(test)}});
    auto groups = [&](const DatasetStore& s) {
      std::set<std::string> g;
      for (const auto& img : s.images) g.insert(group == "video" ? *img.meta.video_id : img.id);
      return g.size();
    };
    std::cout << "train: " << groups(train) << " groups, " << train.images.size() << " images, "
              << train.annotations.size() << " annotations\n";
    std::cout << "test: " << groups(test) << " groups, " << test.images.size() << " images, "
              << test.annotations.size() << " annotations\n";
  }
};

struct ConvertCmd {
  fs::path in, out;
  std::string format = "yolo";

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("convert", "re-save a dataset in the coco-like or yolo-like layout");
    c->add_option("--in", in, "input dataset (.json)")->required();
    c->add_option("--out", out, "output file (coco) or directory (yolo)")->required();
    c->add_option("--format", format, "output format")->check(CLI::IsMember({"coco", "yolo"}))->capture_default_str();
    c->callback([this] { run(); });
  }

  void run() {
    const auto store = load_dataset(in);
    if (format == "yolo") render_yolo(store);  // surface missing sizes before writing
    save_dataset(store, out, format == "yolo" ? DatasetFormat::yolo_like : DatasetFormat::coco_like);
    std::cout << "wrote " << store.images.size() << " images, " << store.annotations.size() << " annotations\n";
  }
};

struct HistogramCmd {
  fs::path in, csv;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("histogram", "instances per class");
    c->add_option("--in", in, "dataset (.json)")->required();
    c->add_option("--csv", csv, "write category,name,count,fraction rows");
    c->callback([this] { run(); });
  }

  void run() {
    const auto bins = class_histogram(load_dataset(in));
    std::string text = "category,name,count,fraction\n";
    for (const auto& b : bins) {
      text += std::to_string(b.category) + ",\"" + b.name + "\"," + std::to_string(b.count) + "," +
              format_double(b.fraction) + "\n";
    }
    if (!csv.empty()) write_text_file(csv, text);
    for (const auto& b : bins) {
      std::cout << b.category << "  " << b.name << "  " << b.count << "  " << pct(b.fraction) << "\n";
    }
  }
};

struct ManifestCmd {
  fs::path videos, out;
  double fps = 1.0;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("manifest", "list frames sampled from videos at a fixed rate");
    c->add_option("--videos", videos, "stream of {\"video_id\", \"duration_s\"} records (.jsonl)")->required();
    c->add_option("--fps", fps, "sampling rate")->capture_default_str();
    c->add_option("--out", out, "frame manifest (.jsonl)")->required();
    c->callback([this] { run(); });
  }

  void run() {
    std::vector<std::pair<std::string, double>> list;
    std::istringstream vin(read_text_file(videos));
    for_each_record(vin, videos.string(), [&](const Json& j, std::size_t line) {
      const auto ctx = videos.string() + ":" + std::to_string(line);
      list.emplace_back(field::get_string(j, "video_id", ctx), field::get_number(j, "duration_s", ctx));
    });
    const auto frames = frame_manifest(list, fps);
    std::string text = dump_line(Json{{"header", Json{{"fps", fps}}}});
    for (const auto& f : frames) {
      text += dump_line(Json{{"video_id", f.video_id}, {"frame_index", f.frame_index}, {"timestamp", f.timestamp}});
    }
    write_text_file(out, text);
    std::cout << "videos " << list.size() << ", frames " << frames.size() << "\n";
  }
};

struct CostCmd {
  long long manual = 0, total = 0;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("cost", "share of frames that needed no manual annotation");
    c->add_option("--manual", manual, "manually annotated frames")->required();
    c->add_option("--total", total, "total frames")->required();
    c->callback([this] { std::cout << "annotation cost reduction: " << pct(cost_report(manual, total)) << "\n"; });
  }
};

struct SimilarityCmd {
  fs::path embeddings;
  std::size_t k = 5;

  void setup(CLI::App& root) {
    auto* c = root.add_subcommand("similarity", "mean top-k cosine similarity within an embedding set");
    c->add_option("--embeddings", embeddings, "stream of {\"name\", \"vector\"} records (.jsonl)")->required();
    c->add_option("--k", k, "neighbours per entry")->capture_default_str();
    c->callback([this] {
      std::istringstream in(read_text_file(embeddings));
      const auto set = read_embedding_stream(in, embeddings.string());
      std::cout << "top-" << k << " mean cosine similarity " << format_fixed(topk_avg_cosine(set, k), 4) << " over "
                << set.entries.size() << " entries\n";
    });
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak and pseudo annotation toolkit"};
  app.require_subcommand(1);
  FilterCmd filter;
  WeakCmd weak;
  PropagateCmd propagate;
  EvalCmd eval;
  SplitCmd split;
  ConvertCmd convert;
  HistogramCmd histogram;
  ManifestCmd manifest;
  CostCmd cost;
  SimilarityCmd similarity;
  filter.setup(app);
  weak.setup(app);
  propagate.setup(app);
  eval.setup(app);
  split.setup(app);
  convert.setup(app);
  histogram.setup(app);
  manifest.setup(app);
  cost.setup(app);
  similarity.setup(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::io ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
