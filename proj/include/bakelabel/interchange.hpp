#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bakelabel/error.hpp"
#include "bakelabel/geometry.hpp"
#include "bakelabel/io.hpp"

namespace bakelabel {

// ---------------------------------------------------------------------------
// Data model
// ---------------------------------------------------------------------------

struct Category {
  CategoryId id = 0;
  std::string name;
  bool is_fallback = false;

  bool operator==(const Category&) const = default;
};

/// Ordered category list with at most one designated fallback entry.
class CategoryTable {
 public:
  CategoryTable() = default;
  explicit CategoryTable(std::vector<Category> entries) : entries_(std::move(entries)) {
    validate();
  }

  const std::vector<Category>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool contains(CategoryId id) const { return index_of(id).has_value(); }

  std::optional<std::size_t> index_of(CategoryId id) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].id == id) return i;
    }
    return std::nullopt;
  }

  const Category& at(CategoryId id) const {
    auto idx = index_of(id);
    if (!idx) fail(ErrorKind::integrity, "unknown category id " + std::to_string(id));
    return entries_[*idx];
  }

  std::optional<CategoryId> fallback() const {
    for (const auto& c : entries_) {
      if (c.is_fallback) return c.id;
    }
    return std::nullopt;
  }

  std::optional<CategoryId> find_by_name(const std::string& name) const {
    for (const auto& c : entries_) {
      if (c.name == name) return c.id;
    }
    return std::nullopt;
  }

  bool operator==(const CategoryTable&) const = default;

 private:
  void validate() const {
    std::set<CategoryId> ids;
    std::set<std::string> names;
    int fallbacks = 0;
    for (const auto& c : entries_) {
      if (!ids.insert(c.id).second) {
        fail(ErrorKind::integrity, "duplicate category id " + std::to_string(c.id));
      }
      if (c.name.empty()) fail(ErrorKind::schema, "category " + std::to_string(c.id) + " has an empty name");
      if (!names.insert(c.name).second) {
        fail(ErrorKind::integrity, "duplicate category name '" + c.name + "'");
      }
      if (c.is_fallback) ++fallbacks;
    }
    if (fallbacks > 1) fail(ErrorKind::integrity, "more than one fallback category");
  }

  std::vector<Category> entries_;
};

/// The 19-class bakery taxonomy. Id 0 ("Backware") is the fallback class.
inline CategoryTable bakery_taxonomy() {
  static const char* const kNames[] = {
      "Backware",
      "Bauernbrot",
      "Flößerbrot",
      "Salzstange",
      "Sonnenblumensemmel",
      "Kürbiskernsemmel",
      "Roggensemmel",
      "Dinkelsemmel",
      "Laugenstange Schinken-Käse",
      "Pfefferlaugenbrezel",
      "Kernige Schinken-Käse-Stange",
      "Schokocroissant",
      "Apfeltasche",
      "Quarktasche",
      "Mohnschnecke",
      "Nussschnecke",
      "Vanillehörnchen",
      "Kirschtasche",
      "Früchteschiffchen Erdbeere",
  };
  std::vector<Category> entries;
  CategoryId id = 0;
  for (const char* name : kNames) {
    entries.push_back({id, name, id == 0});
    ++id;
  }
  return CategoryTable(std::move(entries));
}

struct ImageMeta {
  std::optional<double> camera_angle_deg;
  std::optional<std::string> video_id;
  std::optional<int> frame_index;
  std::optional<CategoryId> image_level_label;

  bool operator==(const ImageMeta&) const = default;
};

struct ImageRecord {
  std::string id;
  std::string file_name;
  std::optional<ImageDims> dims;
  ImageMeta meta;

  bool operator==(const ImageRecord&) const = default;
};

enum class Provenance { manual, weak, pseudo, predicted };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::manual: return "manual";
    case Provenance::weak: return "weak";
    case Provenance::pseudo: return "pseudo";
    case Provenance::predicted: return "predicted";
  }
  return "manual";
}

inline std::optional<Provenance> parse_provenance(const std::string& s) {
  if (s == "manual") return Provenance::manual;
  if (s == "weak") return Provenance::weak;
  if (s == "pseudo") return Provenance::pseudo;
  if (s == "predicted") return Provenance::predicted;
  return std::nullopt;
}

struct Annotation {
  std::int64_t id = 0;
  std::string image_id;
  CategoryId category_id = 0;
  BoundingBox box;
  std::optional<double> score;
  Provenance provenance = Provenance::manual;

  bool operator==(const Annotation&) const = default;
};

/// Images, categories and annotations of one dataset split.
/// Treated as an immutable value once validated; derivations build new stores.
struct DatasetStore {
  std::vector<ImageRecord> images;
  CategoryTable categories;
  std::vector<Annotation> annotations;
  std::optional<std::string> split_tag;
  Json info = Json::object();  // free-form provenance (effective config etc.)

  bool operator==(const DatasetStore& o) const {
    return images == o.images && categories == o.categories &&
           annotations == o.annotations && split_tag == o.split_tag && info == o.info;
  }
};

struct TrackRecord {
  std::string video_id;
  int frame_index = 0;
  int instance_id = 0;
  BoundingBox box;
  CategoryId label = 0;
  double score = 1.0;

  bool operator==(const TrackRecord&) const = default;
};

/// One line of a detection stream.
struct DetectionRecord {
  std::string image_id;
  Detection detection;

  bool operator==(const DetectionRecord&) const = default;
};

inline bool is_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline std::unordered_map<std::string, std::size_t> index_images(const DatasetStore& store) {
  std::unordered_map<std::string, std::size_t> idx;
  idx.reserve(store.images.size());
  for (std::size_t i = 0; i < store.images.size(); ++i) idx.emplace(store.images[i].id, i);
  return idx;
}

inline void validate_image(const ImageRecord& img, const CategoryTable& cats, const std::string& ctx) {
  if (img.id.empty()) fail(ErrorKind::schema, ctx + ": empty image id");
  if (img.dims) require_valid(*img.dims, ctx);
  const auto& m = img.meta;
  if (m.frame_index && *m.frame_index < 0) {
    fail(ErrorKind::validation, ctx + ": frame_index must be >= 0");
  }
  if (m.camera_angle_deg &&
      !(std::isfinite(*m.camera_angle_deg) && *m.camera_angle_deg >= 0.0 && *m.camera_angle_deg <= 90.0)) {
    fail(ErrorKind::validation, ctx + ": camera_angle_deg must lie in [0, 90]");
  }
  if (m.image_level_label && !cats.contains(*m.image_level_label)) {
    fail(ErrorKind::integrity, ctx + ": image_level_label " + std::to_string(*m.image_level_label) +
                                   " is not a known category");
  }
}

/// Checks every store invariant; throws on the first violation.
inline void validate(const DatasetStore& store) {
  std::unordered_map<std::string, std::size_t> images;
  for (std::size_t i = 0; i < store.images.size(); ++i) {
    const auto& img = store.images[i];
    const std::string ctx = "images[" + std::to_string(i) + "] ('" + img.id + "')";
    validate_image(img, store.categories, ctx);
    if (!images.emplace(img.id, i).second) fail(ErrorKind::integrity, ctx + ": duplicate image id");
  }
  std::unordered_set<std::int64_t> ann_ids;
  for (std::size_t i = 0; i < store.annotations.size(); ++i) {
    const auto& a = store.annotations[i];
    const std::string ctx = "annotations[" + std::to_string(i) + "] (id " + std::to_string(a.id) + ")";
    if (!ann_ids.insert(a.id).second) fail(ErrorKind::integrity, ctx + ": duplicate annotation id");
    auto it = images.find(a.image_id);
    if (it == images.end()) fail(ErrorKind::integrity, ctx + ": unknown image id '" + a.image_id + "'");
    if (!store.categories.contains(a.category_id)) {
      fail(ErrorKind::integrity, ctx + ": unknown category id " + std::to_string(a.category_id));
    }
    require_well_formed(a.box, ctx);
    const auto& dims = store.images[it->second].dims;
    if (dims && !inside_image(a.box, *dims)) {
      fail(ErrorKind::validation, ctx + ": box extends beyond image '" + a.image_id + "'");
    }
    if (a.score && !is_unit_interval(*a.score)) fail(ErrorKind::validation, ctx + ": score outside [0, 1]");
  }
}

// ---------------------------------------------------------------------------
// Dataset document (COCO-style subset)
// ---------------------------------------------------------------------------

inline Json box_to_json(const BoundingBox& b) { return Json::array({b.x, b.y, b.w, b.h}); }

inline Json to_json(const DatasetStore& store) {
  Json doc = Json::object();
  Json images = Json::array();
  for (const auto& img : store.images) {
    Json j{{"id", img.id}, {"file_name", img.file_name}};
    if (img.dims) {
      j["width"] = img.dims->width;
      j["height"] = img.dims->height;
    }
    Json meta = Json::object();
    if (img.meta.camera_angle_deg) meta["camera_angle_deg"] = *img.meta.camera_angle_deg;
    if (img.meta.video_id) meta["video_id"] = *img.meta.video_id;
    if (img.meta.frame_index) meta["frame_index"] = *img.meta.frame_index;
    if (img.meta.image_level_label) meta["image_level_label"] = *img.meta.image_level_label;
    j["meta"] = std::move(meta);
    images.push_back(std::move(j));
  }
  Json categories = Json::array();
  for (const auto& c : store.categories.entries()) {
    categories.push_back({{"id", c.id}, {"name", c.name}, {"is_fallback", c.is_fallback}});
  }
  Json annotations = Json::array();
  for (const auto& a : store.annotations) {
    Json j{{"id", a.id},
           {"image_id", a.image_id},
           {"category_id", a.category_id},
           {"bbox", box_to_json(a.box)},
           {"provenance", to_string(a.provenance)}};
    if (a.score) j["score"] = *a.score;
    annotations.push_back(std::move(j));
  }
  doc["images"] = std::move(images);
  doc["categories"] = std::move(categories);
  doc["annotations"] = std::move(annotations);
  if (store.split_tag) doc["split_tag"] = *store.split_tag;
  if (!store.info.empty()) doc["info"] = store.info;
  return doc;
}

inline BoundingBox box_from_json(const Json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 4) fail(ErrorKind::schema, ctx + ": bbox must be [x, y, w, h]");
  BoundingBox b{field::get_number(v[0], ctx + ": bbox[0]"), field::get_number(v[1], ctx + ": bbox[1]"),
                field::get_number(v[2], ctx + ": bbox[2]"), field::get_number(v[3], ctx + ": bbox[3]")};
  require_well_formed(b, ctx);
  return b;
}

inline const Json& require_array(const Json& doc, const char* key, const std::string& source) {
  const Json& v = field::require(doc, key, source);
  if (!v.is_array()) fail(ErrorKind::schema, source + ": '" + key + "' must be an array");
  return v;
}

inline DatasetStore dataset_from_json(const Json& doc, const std::string& source) {
  if (!doc.is_object()) fail(ErrorKind::schema, source + ": top level must be an object");
  DatasetStore store;

  std::vector<Category> cats;
  const Json& jcats = require_array(doc, "categories", source);
  for (std::size_t i = 0; i < jcats.size(); ++i) {
    const std::string ctx = source + ": categories[" + std::to_string(i) + "]";
    const Json& j = jcats[i];
    if (!j.is_object()) fail(ErrorKind::schema, ctx + ": must be an object");
    Category c;
    c.id = static_cast<CategoryId>(field::get_int(j, "id", ctx));
    c.name = field::get_string(j, "name", ctx);
    if (field::has(j, "is_fallback")) {
      if (!j["is_fallback"].is_boolean()) fail(ErrorKind::schema, ctx + ": 'is_fallback' must be a boolean");
      c.is_fallback = j["is_fallback"].get<bool>();
    }
    cats.push_back(std::move(c));
  }
  try {
    store.categories = CategoryTable(std::move(cats));
  } catch (const Error& e) {
    fail(e.kind(), source + ": " + e.what());
  }

  const Json& jimages = require_array(doc, "images", source);
  for (std::size_t i = 0; i < jimages.size(); ++i) {
    const std::string ctx = source + ": images[" + std::to_string(i) + "]";
    const Json& j = jimages[i];
    if (!j.is_object()) fail(ErrorKind::schema, ctx + ": must be an object");
    ImageRecord img;
    img.id = field::get_string(j, "id", ctx);
    img.file_name = field::get_string(j, "file_name", ctx);
    const bool has_w = field::has(j, "width");
    const bool has_h = field::has(j, "height");
    if (has_w != has_h) fail(ErrorKind::schema, ctx + ": width and height must be given together");
    if (has_w) {
      img.dims = ImageDims{static_cast<int>(field::get_int(j, "width", ctx)),
                           static_cast<int>(field::get_int(j, "height", ctx))};
    }
    if (field::has(j, "meta")) {
      const Json& m = j["meta"];
      if (!m.is_object()) fail(ErrorKind::schema, ctx + ": 'meta' must be an object");
      const std::string mctx = ctx + ".meta";
      if (field::has(m, "camera_angle_deg")) img.meta.camera_angle_deg = field::get_number(m, "camera_angle_deg", mctx);
      if (field::has(m, "video_id")) img.meta.video_id = field::get_string(m, "video_id", mctx);
      if (field::has(m, "frame_index")) img.meta.frame_index = static_cast<int>(field::get_int(m, "frame_index", mctx));
      if (field::has(m, "image_level_label")) {
        img.meta.image_level_label = static_cast<CategoryId>(field::get_int(m, "image_level_label", mctx));
      }
    }
    store.images.push_back(std::move(img));
  }

  const Json& janns = require_array(doc, "annotations", source);
  for (std::size_t i = 0; i < janns.size(); ++i) {
    const std::string ctx = source + ": annotations[" + std::to_string(i) + "]";
    const Json& j = janns[i];
    if (!j.is_object()) fail(ErrorKind::schema, ctx + ": must be an object");
    Annotation a;
    a.id = field::get_int(j, "id", ctx);
    a.image_id = field::get_string(j, "image_id", ctx);
    a.category_id = static_cast<CategoryId>(field::get_int(j, "category_id", ctx));
    a.box = box_from_json(field::require(j, "bbox", ctx), ctx);
    if (field::has(j, "score")) a.score = field::get_number(j, "score", ctx);
    if (field::has(j, "provenance")) {
      const auto s = field::get_string(j, "provenance", ctx);
      auto p = parse_provenance(s);
      if (!p) fail(ErrorKind::schema, ctx + ": unknown provenance '" + s + "'");
      a.provenance = *p;
    }
    store.annotations.push_back(std::move(a));
  }

  if (field::has(doc, "split_tag")) store.split_tag = field::get_string(doc, "split_tag", source);
  if (field::has(doc, "info")) {
    if (!doc["info"].is_object()) fail(ErrorKind::schema, source + ": 'info' must be an object");
    store.info = doc["info"];
  }

  try {
    validate(store);
  } catch (const Error& e) {
    fail(e.kind(), source + ": " + e.what());
  }
  return store;
}

inline std::string serialize_dataset(const DatasetStore& store) { return dump_canonical(to_json(store)); }

inline DatasetStore parse_dataset(std::string_view text, const std::string& source) {
  return dataset_from_json(parse_document(text, source), source);
}

inline DatasetStore load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// YOLO-style export
// ---------------------------------------------------------------------------

enum class DatasetFormat { coco_like, yolo_like };

/// Label file path for an image: its file name with the extension replaced.
inline std::filesystem::path yolo_label_path(const ImageRecord& img) {
  std::filesystem::path p(img.file_name.empty() ? img.id : img.file_name);
  p.replace_extension(".txt");
  return p.relative_path();
}

/// "class_index cx cy w h" with coordinates normalized by the image size.
/// class_index is the category's position in the table.
inline std::string yolo_line(const Annotation& a, const ImageDims& dims, std::size_t class_index) {
  const double W = dims.width;
  const double H = dims.height;
  const double cx = (a.box.x + a.box.w / 2.0) / W;
  const double cy = (a.box.y + a.box.h / 2.0) / H;
  return std::to_string(class_index) + " " + format_double(cx) + " " + format_double(cy) + " " +
         format_double(a.box.w / W) + " " + format_double(a.box.h / H);
}

/// Renders every label file (relative path -> content), plus classes.txt.
inline std::map<std::filesystem::path, std::string> render_yolo(const DatasetStore& store) {
  std::map<std::filesystem::path, std::string> files;
  std::string classes;
  for (const auto& c : store.categories.entries()) classes += c.name + "\n";
  files["classes.txt"] = classes;

  auto idx = index_images(store);
  for (const auto& img : store.images) {
    if (!img.dims) fail(ErrorKind::validation, "yolo export: image '" + img.id + "' has no dimensions");
    auto path = yolo_label_path(img);
    if (path == "classes.txt" || files.count(path)) {
      fail(ErrorKind::integrity, "yolo export: label file collision at " + path.string());
    }
    files[path] = "";
  }
  for (const auto& a : store.annotations) {
    const auto& img = store.images[idx.at(a.image_id)];
    files[yolo_label_path(img)] += yolo_line(a, *img.dims, *store.categories.index_of(a.category_id)) + "\n";
  }
  return files;
}

/// Reads label files written by the YOLO export back against a known image and
/// category list. Annotations come back as manual, in image order, ids from 1.
inline DatasetStore import_yolo(const std::filesystem::path& dir, std::vector<ImageRecord> images,
                                CategoryTable categories) {
  DatasetStore store;
  store.images = std::move(images);
  store.categories = std::move(categories);
  std::int64_t next_id = 1;
  for (const auto& img : store.images) {
    if (!img.dims) fail(ErrorKind::validation, "yolo import: image '" + img.id + "' has no dimensions");
    const auto path = dir / yolo_label_path(img);
    if (!std::filesystem::exists(path)) continue;
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ls(line);
      std::size_t cls = 0;
      double cx = 0, cy = 0, w = 0, h = 0;
      if (!(ls >> cls >> cx >> cy >> w >> h) || cls >= store.categories.size()) {
        fail(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": malformed label line");
      }
      const double W = img.dims->width;
      const double H = img.dims->height;
      Annotation a;
      a.id = next_id++;
      a.image_id = img.id;
      a.category_id = store.categories.entries()[cls].id;
      a.box = BoundingBox{(cx - w / 2.0) * W, (cy - h / 2.0) * H, w * W, h * H};
      if (auto clipped = clip(a.box, *img.dims)) a.box = *clipped;
      store.annotations.push_back(std::move(a));
    }
  }
  validate(store);
  return store;
}

inline void save_dataset(const DatasetStore& store, const std::filesystem::path& path,
                         DatasetFormat format = DatasetFormat::coco_like) {
  validate(store);
  if (format == DatasetFormat::coco_like) {
    write_text_file(path, serialize_dataset(store));
    return;
  }
  // Render everything before touching the disk.
  auto files = render_yolo(store);
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) fail(ErrorKind::io, path.string() + ": " + ec.message());
  for (const auto& [rel, content] : files) write_text_file(path / rel, content);
}

// ---------------------------------------------------------------------------
// Line-delimited streams
// ---------------------------------------------------------------------------

inline DetectionRecord detection_from_json(const Json& j, const std::string& ctx) {
  DetectionRecord r;
  r.image_id = field::get_string(j, "image_id", ctx);
  auto& d = r.detection;
  d.box = BoundingBox{field::get_number(j, "x", ctx), field::get_number(j, "y", ctx),
                      field::get_number(j, "w", ctx), field::get_number(j, "h", ctx)};
  require_well_formed(d.box, ctx);
  d.score = field::get_number(j, "score", ctx);
  if (!is_unit_interval(d.score)) fail(ErrorKind::validation, ctx + ": score outside [0, 1]");
  if (field::has(j, "label")) d.label = static_cast<CategoryId>(field::get_int(j, "label", ctx));
  if (field::has(j, "source")) d.source = field::get_string(j, "source", ctx);
  return r;
}

inline Json detection_to_json(const DetectionRecord& r) {
  const auto& d = r.detection;
  Json j{{"image_id", r.image_id}, {"x", d.box.x}, {"y", d.box.y}, {"w", d.box.w},
         {"h", d.box.h},           {"score", d.score}, {"source", d.source}};
  if (d.label) j["label"] = *d.label;
  return j;
}

inline std::vector<DetectionRecord> read_detection_stream(std::istream& in, const std::string& source) {
  std::vector<DetectionRecord> out;
  for_each_record(in, source, [&](const Json& j, std::size_t line) {
    out.push_back(detection_from_json(j, source + ":" + std::to_string(line)));
  });
  return out;
}

inline std::vector<DetectionRecord> load_detection_stream(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return read_detection_stream(in, path.string());
}

/// Header line (when `header` is non-null) followed by one record per line.
inline std::string render_detection_stream(const std::vector<DetectionRecord>& records,
                                           const Json& header = nullptr) {
  std::string out;
  if (!header.is_null()) out += dump_line(Json{{"header", header}});
  for (const auto& r : records) out += dump_line(detection_to_json(r));
  return out;
}

inline TrackRecord track_from_json(const Json& j, const std::string& ctx) {
  TrackRecord t;
  t.video_id = field::get_string(j, "video_id", ctx);
  t.frame_index = static_cast<int>(field::get_int(j, "frame_index", ctx));
  if (t.frame_index < 0) fail(ErrorKind::validation, ctx + ": frame_index must be >= 0");
  t.instance_id = static_cast<int>(field::get_int(j, "instance_id", ctx));
  t.box = BoundingBox{field::get_number(j, "x", ctx), field::get_number(j, "y", ctx),
                      field::get_number(j, "w", ctx), field::get_number(j, "h", ctx)};
  require_well_formed(t.box, ctx);
  t.label = static_cast<CategoryId>(field::get_int(j, "label", ctx));
  t.score = field::get_number(j, "score", ctx);
  if (!is_unit_interval(t.score)) fail(ErrorKind::validation, ctx + ": score outside [0, 1]");
  return t;
}

inline Json track_to_json(const TrackRecord& t) {
  return Json{{"video_id", t.video_id}, {"frame_index", t.frame_index}, {"instance_id", t.instance_id},
              {"x", t.box.x},           {"y", t.box.y},                 {"w", t.box.w},
              {"h", t.box.h},           {"label", t.label},             {"score", t.score}};
}

inline std::vector<TrackRecord> read_track_stream(std::istream& in, const std::string& source) {
  std::vector<TrackRecord> out;
  for_each_record(in, source, [&](const Json& j, std::size_t line) {
    out.push_back(track_from_json(j, source + ":" + std::to_string(line)));
  });
  return out;
}

inline std::vector<TrackRecord> load_track_stream(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return read_track_stream(in, path.string());
}

inline std::string render_track_stream(const std::vector<TrackRecord>& tracks, const Json& header = nullptr) {
  std::string out;
  if (!header.is_null()) out += dump_line(Json{{"header", header}});
  for (const auto& t : tracks) out += dump_line(track_to_json(t));
  return out;
}

// ---------------------------------------------------------------------------
// Splits, manifests, statistics
// ---------------------------------------------------------------------------

enum class GroupKey { image, video };

/// Subset of `store` restricted to the given image ids (categories kept whole).
inline DatasetStore select_images(const DatasetStore& store, const std::unordered_set<std::string>& keep) {
  DatasetStore out;
  out.categories = store.categories;
  out.info = store.info;
  for (const auto& img : store.images) {
    if (keep.count(img.id)) out.images.push_back(img);
  }
  for (const auto& a : store.annotations) {
    if (keep.count(a.image_id)) out.annotations.push_back(a);
  }
  return out;
}

/// Seeded grouped train/test split. Whole groups (single images, or all frames
/// of one video) land on exactly one side; the train side receives
/// round(train_fraction * groups) groups. Groups are sorted by key and then
/// Fisher-Yates shuffled with mt19937_64, so results do not depend on the
/// standard library's distribution implementations.
inline std::pair<DatasetStore, DatasetStore> split_grouped(const DatasetStore& store, double train_fraction,
                                                           GroupKey key, std::uint64_t seed,
                                                           bool allow_degenerate = false) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::validation, "split: train fraction must lie in (0, 1)");
  }
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& img : store.images) {
    if (key == GroupKey::video) {
      if (!img.meta.video_id) fail(ErrorKind::validation, "split: image '" + img.id + "' has no video_id");
      groups[*img.meta.video_id].push_back(img.id);
    } else {
      groups[img.id].push_back(img.id);
    }
  }
  std::vector<const std::vector<std::string>*> order;
  order.reserve(groups.size());
  for (const auto& [k, members] : groups) order.push_back(&members);

  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(order.size())));
  if (!allow_degenerate && (n_train == 0 || n_train == order.size())) {
    fail(ErrorKind::validation, "split: " + std::to_string(order.size()) + " group(s) at fraction " +
                                    format_double(train_fraction) + " leaves one side empty");
  }
  std::unordered_set<std::string> train_ids;
  std::unordered_set<std::string> test_ids;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& side = i < n_train ? train_ids : test_ids;
    side.insert(order[i]->begin(), order[i]->end());
  }
  auto train = select_images(store, train_ids);
  auto test = select_images(store, test_ids);
  train.split_tag = "train";
  test.split_tag = "test";
  return {std::move(train), std::move(test)};
}

struct FrameEntry {
  std::string video_id;
  int frame_index = 0;
  double timestamp = 0.0;

  bool operator==(const FrameEntry&) const = default;
};

/// Frames sampled at `fps`: floor(duration * fps) frames per video,
/// frame k at timestamp k / fps. Bookkeeping only.
inline std::vector<FrameEntry> frame_manifest(const std::vector<std::pair<std::string, double>>& videos,
                                              double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) fail(ErrorKind::validation, "frame manifest: fps must be > 0");
  std::vector<FrameEntry> out;
  for (const auto& [video_id, duration] : videos) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
      fail(ErrorKind::validation, "frame manifest: video '" + video_id + "' has a negative duration");
    }
    // Small slack so that e.g. 0.7 s * 10 fps yields 7 frames, not 6.
    const auto count = static_cast<long long>(std::floor(duration * fps + 1e-9));
    for (long long k = 0; k < count; ++k) {
      out.push_back({video_id, static_cast<int>(k), static_cast<double>(k) / fps});
    }
  }
  return out;
}

struct HistogramBin {
  CategoryId category = 0;
  std::string name;
  std::size_t count = 0;
  double fraction = 0.0;
};

/// Relative instance frequency per category, in table order.
inline std::vector<HistogramBin> class_histogram(const DatasetStore& store) {
  std::vector<HistogramBin> bins;
  for (const auto& c : store.categories.entries()) bins.push_back({c.id, c.name, 0, 0.0});
  for (const auto& a : store.annotations) {
    auto idx = store.categories.index_of(a.category_id);
    if (!idx) fail(ErrorKind::integrity, "histogram: unknown category " + std::to_string(a.category_id));
    ++bins[*idx].count;
  }
  const auto total = store.annotations.size();
  if (total > 0) {
    for (auto& b : bins) b.fraction = static_cast<double>(b.count) / static_cast<double>(total);
  }
  return bins;
}

}  // namespace bakelabel
