#pragma once

// Independent reference computations for tests. Nothing here calls into the
// library's geometry, matching or AP code.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bakelabel/eval.hpp"

namespace oracle {

struct Rect {
  double x1, y1, x2, y2;
};

inline double box_iou(const bakelabel::BoundingBox& a, const bakelabel::BoundingBox& b) {
  const Rect ra{a.x, a.y, a.x + a.w, a.y + a.h};
  const Rect rb{b.x, b.y, b.x + b.w, b.y + b.h};
  const double iw = std::max(0.0, std::min(ra.x2, rb.x2) - std::max(ra.x1, rb.x1));
  const double ih = std::max(0.0, std::min(ra.y2, rb.y2) - std::max(ra.y1, rb.y1));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// Standard normal CDF by composite Simpson integration of the density.
inline double normal_cdf(double z) {
  const double lo = -12.0;
  if (z <= lo) return 0.0;
  const int n = 200000;  // even
  const double h = (z - lo) / n;
  auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = pdf(lo) + pdf(z);
  for (int i = 1; i < n; ++i) s += pdf(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Exhaustive PR-curve AP for one class and threshold. Predictions are ranked
/// by descending score with ties broken by (image id, box, label); matching
/// scans every ground-truth box; interpolation compares recall as an exact
/// rational (tp * 100 >= i * n_gt).
inline double brute_force_ap(std::vector<bakelabel::EvalBox> preds, const std::vector<bakelabel::EvalBox>& gts,
                             double threshold) {
  std::stable_sort(preds.begin(), preds.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::make_tuple(a.image_id, a.box.x, a.box.y, a.box.w, a.box.h, a.label) <
           std::make_tuple(b.image_id, b.box.x, b.box.y, b.box.w, b.box.h, b.label);
  });
  const long n_gt = static_cast<long>(gts.size());
  std::vector<bool> used(gts.size(), false);
  std::vector<long> tp_at;
  std::vector<double> prec_at;
  long tp = 0;
  for (std::size_t k = 0; k < preds.size(); ++k) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].image_id != preds[k].image_id) continue;
      const double v = box_iou(preds[k].box, gts[g].box);
      if (v >= threshold && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      ++tp;
    }
    tp_at.push_back(tp);
    prec_at.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  double sum = 0.0;
  for (long i = 0; i <= 100; ++i) {
    double p = 0.0;
    for (std::size_t k = 0; k < tp_at.size(); ++k) {
      if (tp_at[k] * 100 >= i * n_gt) p = std::max(p, prec_at[k]);
    }
    sum += p;
  }
  return sum / 101.0;
}

struct MapResult {
  double map = 0.0;
  double aap = 0.0;
};

/// mAP and class-agnostic AP as the plain double loop over classes and
/// thresholds.
inline MapResult brute_force_map(const std::vector<bakelabel::EvalBox>& preds,
                                 const std::vector<bakelabel::EvalBox>& gts, const std::vector<double>& thresholds) {
  std::set<int> classes;
  for (const auto& g : gts) classes.insert(g.label);
  MapResult r;
  for (int c : classes) {
    std::vector<bakelabel::EvalBox> p, g;
    for (const auto& b : preds) {
      if (b.label == c) p.push_back(b);
    }
    for (const auto& b : gts) {
      if (b.label == c) g.push_back(b);
    }
    double s = 0.0;
    for (double t : thresholds) s += brute_force_ap(p, g, t);
    r.map += s / static_cast<double>(thresholds.size());
  }
  r.map /= static_cast<double>(classes.size());
  double s = 0.0;
  for (double t : thresholds) s += brute_force_ap(preds, gts, t);
  r.aap = s / static_cast<double>(thresholds.size());
  return r;
}

}  // namespace oracle
