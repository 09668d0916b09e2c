#pragma once

#include <algorithm>
#include <compare>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "bakelabel/error.hpp"

namespace bakelabel {

using CategoryId = int;

/// Axis-aligned rectangle in continuous pixel coordinates, top-left origin.
/// Boxes are closed; edge-touching boxes intersect with zero area.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }

  bool operator==(const BoundingBox&) const = default;
  auto operator<=>(const BoundingBox&) const = default;
};

struct ImageDims {
  int width = 0;
  int height = 0;

  bool operator==(const ImageDims&) const = default;
};

/// A scored localization, optionally classified, tagged with its producer.
struct Detection {
  BoundingBox box;
  double score = 0.0;
  std::optional<CategoryId> label;
  std::string source;

  bool operator==(const Detection&) const = default;
};

inline bool is_well_formed(const BoundingBox& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
         std::isfinite(b.h) && b.w > 0.0 && b.h > 0.0;
}

inline void require_well_formed(const BoundingBox& b, const std::string& context) {
  if (!is_well_formed(b)) {
    fail(ErrorKind::validation,
         context + ": degenerate box (w and h must be finite and > 0)");
  }
}

inline void require_valid(const ImageDims& d, const std::string& context) {
  if (d.width < 1 || d.height < 1) {
    fail(ErrorKind::validation, context + ": image dimensions must be >= 1");
  }
}

inline double area(const BoundingBox& b) { return b.w * b.h; }

namespace detail {

// Length of the overlap of [a_lo, a_lo + a_len] and [b_lo, b_lo + b_len].
// Full containment returns the contained length exactly, so that identical
// and nested boxes do not pick up rounding from (x + w) - x.
inline double overlap_length(double a_lo, double a_len, double b_lo, double b_len) {
  const double a_hi = a_lo + a_len;
  const double b_hi = b_lo + b_len;
  if (b_lo <= a_lo && a_hi <= b_hi) return a_len;
  if (a_lo <= b_lo && b_hi <= a_hi) return b_len;
  return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

}  // namespace detail

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  return detail::overlap_length(a.x, a.w, b.x, b.w) *
         detail::overlap_length(a.y, a.h, b.y, b.h);
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = area(a) + area(b) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Share of `inner` covered by `outer`. Not symmetric.
inline double capture_rate(const BoundingBox& inner, const BoundingBox& outer) {
  const double inter = intersection_area(inner, outer);
  if (inter <= 0.0) return 0.0;
  return std::clamp(inter / area(inner), 0.0, 1.0);
}

inline bool inside_image(const BoundingBox& b, const ImageDims& dims) {
  return b.x >= 0.0 && b.y >= 0.0 && b.right() <= dims.width &&
         b.bottom() <= dims.height;
}

/// Clips to the image rectangle; nullopt when nothing of positive area remains.
inline std::optional<BoundingBox> clip(const BoundingBox& b, const ImageDims& dims) {
  if (inside_image(b, dims)) return b;
  const double x1 = std::clamp(b.x, 0.0, static_cast<double>(dims.width));
  const double y1 = std::clamp(b.y, 0.0, static_cast<double>(dims.height));
  const double x2 = std::clamp(b.right(), 0.0, static_cast<double>(dims.width));
  const double y2 = std::clamp(b.bottom(), 0.0, static_cast<double>(dims.height));
  BoundingBox out{x1, y1, x2 - x1, y2 - y1};
  if (!is_well_formed(out)) return std::nullopt;
  return out;
}

inline double image_area_fraction(const BoundingBox& b, const ImageDims& dims) {
  require_valid(dims, "image_area_fraction");
  if (!inside_image(b, dims)) {
    fail(ErrorKind::validation, "image_area_fraction: box extends beyond the image");
  }
  return area(b) / (static_cast<double>(dims.width) * static_cast<double>(dims.height));
}

/// Strict weak order used wherever detections are ranked: descending score,
/// then lexicographically smaller (x, y, w, h), then label, then source.
inline bool ranks_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.box != b.box) return a.box < b.box;
  if (a.label != b.label) return a.label < b.label;
  return a.source < b.source;
}

inline void sort_by_rank(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), ranks_before);
}

/// Greedy non-maximum suppression. A detection is suppressed when its IoU with
/// an already kept detection exceeds `iou_threshold` (strict). Unless
/// `class_agnostic` is set, only detections with equal labels compete.
/// Survivors are returned in rank order.
inline std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold,
                                  bool class_agnostic) {
  sort_by_rank(dets);
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (auto& d : dets) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return (class_agnostic || k.label == d.label) && iou(k.box, d.box) > iou_threshold;
    });
    if (!suppressed) kept.push_back(std::move(d));
  }
  return kept;
}

}  // namespace bakelabel
