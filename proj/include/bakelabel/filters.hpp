#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <string>
#include <vector>

#include "bakelabel/error.hpp"
#include "bakelabel/geometry.hpp"
#include "bakelabel/io.hpp"

namespace bakelabel {

/// Thresholds of the four-stage cleanup applied to class-agnostic localizer
/// output. Background removal is inclusive (>=); duplicate and containment
/// tests are strict (>).
struct FilterConfig {
  double background_area_fraction = 0.90;
  double duplicate_iou = 0.75;
  double containment_capture = 0.95;
  int crowd_min_contained = 3;

  void validate() const {
    auto unit = [](double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; };
    if (!unit(background_area_fraction) || !unit(duplicate_iou) || !unit(containment_capture)) {
      fail(ErrorKind::validation, "filter config: fractions must lie in (0, 1]");
    }
    if (crowd_min_contained < 2) {
      fail(ErrorKind::validation, "filter config: crowd_min_contained must be >= 2");
    }
  }

  Json to_json() const {
    return Json{{"background_area_fraction", background_area_fraction},
                {"duplicate_iou", duplicate_iou},
                {"containment_capture", containment_capture},
                {"crowd_min_contained", crowd_min_contained}};
  }

  /// Thresholds under which no stage can fire on boxes strictly inside the image.
  static FilterConfig pass_through() { return {1.0, 1.0, 1.0, INT_MAX}; }
};

enum class FilterStage { background, duplicate, crowd, nested };

inline const char* to_string(FilterStage s) {
  switch (s) {
    case FilterStage::background: return "background";
    case FilterStage::duplicate: return "duplicate";
    case FilterStage::crowd: return "crowd";
    case FilterStage::nested: return "nested";
  }
  return "";
}

struct Removal {
  Detection detection;
  FilterStage stage = FilterStage::background;

  bool operator==(const Removal&) const = default;
};

struct FilterTrace {
  std::vector<Removal> removed;
  std::vector<Detection> kept;

  std::size_t removed_at(FilterStage stage) const {
    return static_cast<std::size_t>(std::count_if(removed.begin(), removed.end(),
                                                  [&](const Removal& r) { return r.stage == stage; }));
  }
};

/// Drops detections covering at least `background_area_fraction` of the image.
inline FilterTrace background_filter(const std::vector<Detection>& dets, const ImageDims& dims,
                                     const FilterConfig& cfg) {
  FilterTrace trace;
  for (const auto& d : dets) {
    if (image_area_fraction(d.box, dims) >= cfg.background_area_fraction) {
      trace.removed.push_back({d, FilterStage::background});
    } else {
      trace.kept.push_back(d);
    }
  }
  return trace;
}

/// Greedy keep in rank order; a detection is dropped when its IoU with an
/// already kept one exceeds `duplicate_iou`. Survivors come out in rank order.
inline FilterTrace duplicate_filter(std::vector<Detection> dets, const FilterConfig& cfg) {
  sort_by_rank(dets);
  FilterTrace trace;
  for (auto& d : dets) {
    const bool dup = std::any_of(trace.kept.begin(), trace.kept.end(),
                                 [&](const Detection& k) { return iou(k.box, d.box) > cfg.duplicate_iou; });
    if (dup) {
      trace.removed.push_back({std::move(d), FilterStage::duplicate});
    } else {
      trace.kept.push_back(std::move(d));
    }
  }
  return trace;
}

namespace detail {

// contains[i][j]: detection j is captured by detection i beyond the threshold.
inline std::vector<std::vector<bool>> containment_matrix(const std::vector<Detection>& dets, double threshold) {
  const std::size_t n = dets.size();
  std::vector<std::vector<bool>> m(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) m[i][j] = capture_rate(dets[j].box, dets[i].box) > threshold;
    }
  }
  return m;
}

}  // namespace detail

/// Drops detections that contain `crowd_min_contained` or more others.
/// Counts are taken over the whole input before anything is removed.
inline FilterTrace crowd_filter(const std::vector<Detection>& dets, const FilterConfig& cfg) {
  const auto contains = detail::containment_matrix(dets, cfg.containment_capture);
  FilterTrace trace;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const auto n_inside = std::count(contains[i].begin(), contains[i].end(), true);
    if (n_inside >= cfg.crowd_min_contained) {
      trace.removed.push_back({dets[i], FilterStage::crowd});
    } else {
      trace.kept.push_back(dets[i]);
    }
  }
  return trace;
}

/// Drops detections contained in any other detection of the input.
inline FilterTrace nested_filter(const std::vector<Detection>& dets, const FilterConfig& cfg) {
  const auto contains = detail::containment_matrix(dets, cfg.containment_capture);
  FilterTrace trace;
  for (std::size_t j = 0; j < dets.size(); ++j) {
    bool inside = false;
    for (std::size_t i = 0; i < dets.size() && !inside; ++i) inside = contains[i][j];
    if (inside) {
      trace.removed.push_back({dets[j], FilterStage::nested});
    } else {
      trace.kept.push_back(dets[j]);
    }
  }
  return trace;
}

/// background -> duplicate -> crowd -> nested, each stage fed the survivors of
/// the previous one. Removals are listed in stage order.
inline FilterTrace apply_pipeline(const std::vector<Detection>& dets, const ImageDims& dims,
                                  const FilterConfig& cfg) {
  cfg.validate();
  FilterTrace total;
  auto absorb = [&total](FilterTrace step) {
    total.removed.insert(total.removed.end(), std::make_move_iterator(step.removed.begin()),
                         std::make_move_iterator(step.removed.end()));
    return std::move(step.kept);
  };
  auto kept = absorb(background_filter(dets, dims, cfg));
  kept = absorb(duplicate_filter(std::move(kept), cfg));
  kept = absorb(crowd_filter(kept, cfg));
  kept = absorb(nested_filter(kept, cfg));
  total.kept = std::move(kept);
  return total;
}

}  // namespace bakelabel
