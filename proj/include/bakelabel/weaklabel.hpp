#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bakelabel/error.hpp"
#include "bakelabel/filters.hpp"
#include "bakelabel/interchange.hpp"
#include "bakelabel/parallel.hpp"

namespace bakelabel {

/// Turns the survivors of a filter run into annotations of the image's class.
/// Ids are assigned consecutively from `first_id` in kept order.
inline std::vector<Annotation> assign_image_label(const FilterTrace& trace, CategoryId label,
                                                  const CategoryTable& categories, const std::string& image_id,
                                                  std::int64_t first_id = 1) {
  if (!categories.contains(label)) {
    fail(ErrorKind::integrity, "image '" + image_id + "': unknown label " + std::to_string(label));
  }
  std::vector<Annotation> out;
  out.reserve(trace.kept.size());
  for (const auto& d : trace.kept) {
    Annotation a;
    a.id = first_id++;
    a.image_id = image_id;
    a.category_id = label;
    a.box = d.box;
    a.score = d.score;
    a.provenance = Provenance::weak;
    out.push_back(std::move(a));
  }
  return out;
}

struct WeakBuildResult {
  DatasetStore store;
  std::vector<std::string> warnings;
  std::map<FilterStage, std::size_t> removed_per_stage;
};

/// Builds a weakly labeled store from single-class images: each image's raw
/// localizations are cleaned by the filter pipeline and labeled with the
/// image-level class.
inline WeakBuildResult build_weak_dataset(const std::vector<ImageRecord>& images,
                                          const std::vector<DetectionRecord>& detections,
                                          const CategoryTable& categories, const FilterConfig& cfg,
                                          unsigned jobs = 1) {
  cfg.validate();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    const std::string ctx = "image '" + img.id + "'";
    validate_image(img, categories, ctx);
    if (!img.meta.image_level_label) fail(ErrorKind::validation, ctx + ": missing image-level label");
    if (!img.dims) fail(ErrorKind::validation, ctx + ": missing image dimensions");
    if (!index.emplace(img.id, i).second) fail(ErrorKind::integrity, ctx + ": duplicate image id");
  }

  std::vector<std::vector<Detection>> per_image(images.size());
  for (const auto& r : detections) {
    auto it = index.find(r.image_id);
    if (it == index.end()) fail(ErrorKind::integrity, "detection for unknown image '" + r.image_id + "'");
    per_image[it->second].push_back(r.detection);
  }

  std::vector<FilterTrace> traces(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    const auto& dims = *images[i].dims;
    std::vector<Detection> clipped;
    clipped.reserve(per_image[i].size());
    for (const auto& d : per_image[i]) {
      auto box = clip(d.box, dims);
      if (!box) fail(ErrorKind::validation, "image '" + images[i].id + "': detection lies outside the image");
      Detection c = d;
      c.box = *box;
      clipped.push_back(std::move(c));
    }
    traces[i] = apply_pipeline(clipped, dims, cfg);
  });

  WeakBuildResult result;
  result.store.images = images;
  result.store.categories = categories;
  std::int64_t next_id = 1;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (const auto& r : traces[i].removed) ++result.removed_per_stage[r.stage];
    auto anns = assign_image_label(traces[i], *images[i].meta.image_level_label, categories, images[i].id, next_id);
    next_id += static_cast<std::int64_t>(anns.size());
    if (anns.empty()) result.warnings.push_back("image '" + images[i].id + "': no boxes survived filtering");
    result.store.annotations.insert(result.store.annotations.end(), anns.begin(), anns.end());
  }
  result.store.info["filter_config"] = cfg.to_json();
  validate(result.store);
  return result;
}

struct PurityViolation {
  std::string image_id;
  std::string message;

  bool operator==(const PurityViolation&) const = default;
};

/// One entry per image whose annotations are not all of its image-level class.
inline std::vector<PurityViolation> validate_single_class(const DatasetStore& store) {
  std::map<std::string, std::set<CategoryId>> labels;
  for (const auto& a : store.annotations) labels[a.image_id].insert(a.category_id);

  std::vector<PurityViolation> out;
  for (const auto& img : store.images) {
    auto it = labels.find(img.id);
    if (it == labels.end()) continue;
    const auto& seen = it->second;
    std::string why;
    if (seen.size() > 1) {
      why = "annotations span " + std::to_string(seen.size()) + " classes";
    } else if (!img.meta.image_level_label) {
      why = "annotated image has no image-level label";
    } else if (*seen.begin() != *img.meta.image_level_label) {
      why = "annotation class " + std::to_string(*seen.begin()) + " differs from image-level label " +
            std::to_string(*img.meta.image_level_label);
    }
    if (!why.empty()) out.push_back({img.id, why});
  }
  return out;
}

}  // namespace bakelabel
