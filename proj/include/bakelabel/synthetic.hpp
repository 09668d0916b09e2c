#pragma once

// Seeded generators for synthetic scenes, videos and stores. Used for
// fixtures, demos and tests; all output is a pure function of the seed.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bakelabel/filters.hpp"
#include "bakelabel/interchange.hpp"
#include "bakelabel/propagate.hpp"

namespace bakelabel::synthetic {

/// Uniform double in [lo, hi) from raw mt19937_64 output, independent of the
/// standard library's distribution implementations.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(rng() % i)]);
}

/// Over-predicted localizer output on one tray image, with one box for each
/// failure mode the filter pipeline handles:
///   - a near-full-image background box,
///   - a lower-scored duplicate of a clean box,
///   - a crowd box around three objects,
///   - a fragment nested in a clean box,
/// plus six clean boxes and the three crowded objects (nine true objects).
struct Scene {
  ImageDims dims;
  std::vector<Detection> detections;
  std::vector<BoundingBox> objects;  // the nine boxes that should survive
};

inline Scene figure_scene(const std::string& source = "synthetic") {
  Scene s;
  s.dims = {1000, 800};
  auto det = [&](BoundingBox b, double score) { s.detections.push_back({b, score, std::nullopt, source}); };

  // six clean boxes along the top row
  for (int i = 0; i < 6; ++i) {
    BoundingBox b{50.0 + 150.0 * i, 50.0, 100.0, 100.0};
    det(b, 0.90 - 0.01 * i);
    s.objects.push_back(b);
  }
  // three objects under one crowd box
  for (int i = 0; i < 3; ++i) {
    BoundingBox b{110.0 + 140.0 * i, 310.0, 100.0, 100.0};
    det(b, 0.80 - 0.01 * i);
    s.objects.push_back(b);
  }
  det({100.0, 300.0, 400.0, 150.0}, 0.60);  // crowd
  det({5.0, 5.0, 990.0, 790.0}, 0.50);      // background
  det({52.0, 52.0, 100.0, 100.0}, 0.70);    // duplicate of the first clean box
  det({220.0, 60.0, 40.0, 40.0}, 0.40);     // fragment inside the second clean box
  return s;
}

/// Random scene for property tests: boxes of mixed sizes, some nested or
/// overlapping, all clipped to the image.
inline Scene random_scene(std::mt19937_64& rng, int max_boxes = 14) {
  Scene s;
  s.dims = {uniform_int(rng, 200, 1200), uniform_int(rng, 200, 900)};
  const int n = uniform_int(rng, 0, max_boxes);
  for (int i = 0; i < n; ++i) {
    BoundingBox b;
    const int kind = uniform_int(rng, 0, 9);
    if (kind == 0) {  // near full image
      b = {uniform(rng, 0, 10), uniform(rng, 0, 10), s.dims.width * uniform(rng, 0.85, 0.98),
           s.dims.height * uniform(rng, 0.85, 0.98)};
    } else if (kind <= 2 && !s.detections.empty()) {  // jitter or shrink an earlier box
      const auto& ref = s.detections[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(s.detections.size()) - 1))].box;
      const double f = uniform(rng, 0.3, 1.05);
      b = {ref.x + uniform(rng, -5, 5) + ref.w * (1 - f) / 2, ref.y + uniform(rng, -5, 5) + ref.h * (1 - f) / 2,
           ref.w * f, ref.h * f};
    } else {
      const double w = uniform(rng, 10, s.dims.width * 0.5);
      const double h = uniform(rng, 10, s.dims.height * 0.5);
      b = {uniform(rng, 0, s.dims.width - w), uniform(rng, 0, s.dims.height - h), w, h};
    }
    auto c = clip(b, s.dims);
    if (!c) continue;
    // Keep boxes strictly inside so the pass-through property applies.
    if (c->x <= 0 || c->y <= 0 || c->right() >= s.dims.width || c->bottom() >= s.dims.height) {
      auto shrunk = BoundingBox{c->x + 0.5, c->y + 0.5, c->w - 1.0, c->h - 1.0};
      if (!is_well_formed(shrunk)) continue;
      c = shrunk;
    }
    // Scores on a coarse grid so ties occur.
    const double score = static_cast<double>(uniform_int(rng, 1, 20)) / 20.0;
    s.detections.push_back({*c, score, std::nullopt, "random"});
  }
  return s;
}

/// Ground-truth tracks and per-frame class-agnostic candidates of a video
/// with objects drifting by at most `max_step` px per axis per frame.
/// Objects live in separate 120 px grid cells and never overlap each other.
struct MotionVideo {
  std::string video_id;
  ImageDims dims;
  std::vector<TrackRecord> truth;
  FrameCandidates candidates;
  std::vector<FirstFrameQuery> queries;  // manual, from the frame-0 truth
};

inline MotionVideo motion_video(std::mt19937_64& rng, const std::string& video_id, int n_objects = 5,
                                int n_frames = 10, double box_size = 40.0, double max_step = 2.0,
                                int n_classes = 3) {
  MotionVideo v;
  v.video_id = video_id;
  const double cell = 120.0;
  const int cols = 5;
  v.dims = {static_cast<int>(cell * cols), static_cast<int>(cell * ((n_objects + cols - 1) / cols))};
  struct Obj {
    double x, y, vx, vy;
    CategoryId label;
  };
  std::vector<Obj> objs;
  for (int i = 0; i < n_objects; ++i) {
    const double cx = cell * (i % cols);
    const double cy = cell * (i / cols);
    const double margin = (cell - box_size) / 2.0;
    objs.push_back({cx + margin + uniform(rng, -10, 10), cy + margin + uniform(rng, -10, 10),
                    uniform(rng, -max_step, max_step), uniform(rng, -max_step, max_step),
                    uniform_int(rng, 1, n_classes)});
  }
  for (int f = 0; f < n_frames; ++f) {
    for (int i = 0; i < n_objects; ++i) {
      const auto& o = objs[static_cast<std::size_t>(i)];
      BoundingBox b{o.x + o.vx * f, o.y + o.vy * f, box_size, box_size};
      v.truth.push_back({video_id, f, i, b, o.label, 1.0});
      v.candidates[f].push_back(b);
    }
  }
  // Candidates arrive unordered, like detector output.
  for (auto& [f, boxes] : v.candidates) shuffle(boxes, rng);
  for (int i = 0; i < n_objects; ++i) {
    const auto& t = v.truth[static_cast<std::size_t>(i)];
    v.queries.push_back({video_id, i, t.box, t.label, 1.0, QueryOrigin::manual});
  }
  return v;
}

/// Plain categories "class_0".."class_{n-1}" (ids 0..n-1), optionally with a
/// trailing fallback entry.
inline CategoryTable simple_categories(int n, bool with_fallback = false) {
  std::vector<Category> cats;
  for (int i = 0; i < n; ++i) cats.push_back({i, "class_" + std::to_string(i), false});
  if (with_fallback) cats.push_back({n, "fallback", true});
  return CategoryTable(std::move(cats));
}

/// Random valid store exercising every optional field.
inline DatasetStore random_store(std::mt19937_64& rng, int max_images = 6, int max_annotations = 20) {
  DatasetStore s;
  const int n_cats = uniform_int(rng, 1, 5);
  s.categories = simple_categories(n_cats, uniform_int(rng, 0, 1) == 1);
  const int n_images = uniform_int(rng, 0, max_images);
  for (int i = 0; i < n_images; ++i) {
    ImageRecord img;
    img.id = "img_" + std::to_string(i);
    img.file_name = "frames/" + img.id + ".jpg";
    img.dims = ImageDims{uniform_int(rng, 16, 2000), uniform_int(rng, 16, 2000)};
    if (uniform_int(rng, 0, 1)) img.meta.camera_angle_deg = 10.0 * uniform_int(rng, 0, 8);
    if (uniform_int(rng, 0, 1)) {
      img.meta.video_id = "vid_" + std::to_string(uniform_int(rng, 0, 3));
      img.meta.frame_index = uniform_int(rng, 0, 100);
    }
    if (uniform_int(rng, 0, 1)) img.meta.image_level_label = uniform_int(rng, 0, n_cats - 1);
    s.images.push_back(std::move(img));
  }
  if (!s.images.empty()) {
    const int n_anns = uniform_int(rng, 0, max_annotations);
    for (int a = 0; a < n_anns; ++a) {
      const auto& img = s.images[static_cast<std::size_t>(uniform_int(rng, 0, n_images - 1))];
      const double W = img.dims->width, H = img.dims->height;
      const double w = uniform(rng, 1.0, W);
      const double h = uniform(rng, 1.0, H);
      Annotation ann;
      ann.id = a + 1;
      ann.image_id = img.id;
      ann.category_id = uniform_int(rng, 0, n_cats - 1);
      ann.box = {uniform(rng, 0.0, W - w), uniform(rng, 0.0, H - h), w, h};
      if (auto c = clip(ann.box, *img.dims)) ann.box = *c;
      if (uniform_int(rng, 0, 1)) ann.score = uniform(rng, 0.0, 1.0);
      ann.provenance = static_cast<Provenance>(uniform_int(rng, 0, 3));
      s.annotations.push_back(std::move(ann));
    }
  }
  if (uniform_int(rng, 0, 1)) s.split_tag = "D_train";
  return s;
}

/// Single-class image set with raw localizer output: every image holds
/// `objects_per_image[i]` clean objects plus background, duplicate and
/// nested-fragment noise. Labels cycle through classes 1..n_classes of the
/// bakery taxonomy (id 0 is the fallback).
struct WeakFixture {
  std::vector<ImageRecord> images;
  std::vector<DetectionRecord> detections;
  std::size_t clean_objects = 0;
};

inline WeakFixture weak_fixture(std::mt19937_64& rng, const std::vector<int>& objects_per_image, int n_classes = 18) {
  WeakFixture fx;
  const ImageDims dims{1280, 960};
  for (std::size_t i = 0; i < objects_per_image.size(); ++i) {
    ImageRecord img;
    img.id = "c" + std::to_string(i);
    img.file_name = img.id + ".jpg";
    img.dims = dims;
    img.meta.image_level_label = static_cast<CategoryId>(i % static_cast<std::size_t>(n_classes)) + 1;
    fx.images.push_back(img);

    auto push = [&](BoundingBox b, double score) {
      fx.detections.push_back({img.id, {b, score, std::nullopt, "synthetic-localizer"}});
    };
    // objects on a 4x3 grid of 300x300 cells
    const int n = objects_per_image[i];
    for (int k = 0; k < n; ++k) {
      const double cx = 20.0 + 310.0 * (k % 4);
      const double cy = 20.0 + 310.0 * (k / 4);
      BoundingBox b{cx + uniform(rng, 0, 40), cy + uniform(rng, 0, 40), uniform(rng, 150, 240), uniform(rng, 150, 240)};
      push(b, uniform(rng, 0.55, 0.99));
      ++fx.clean_objects;
      if (uniform_int(rng, 0, 3) == 0) {  // duplicate
        push({b.x + 3, b.y + 3, b.w, b.h}, 0.5 * uniform(rng, 0.5, 1.0));
      }
      if (uniform_int(rng, 0, 3) == 0) {  // fragment
        push({b.x + b.w * 0.25, b.y + b.h * 0.25, b.w * 0.4, b.h * 0.4}, uniform(rng, 0.1, 0.5));
      }
    }
    push({2, 2, dims.width - 4.0, dims.height - 4.0}, uniform(rng, 0.1, 0.6));  // background
  }
  return fx;
}

}  // namespace bakelabel::synthetic
