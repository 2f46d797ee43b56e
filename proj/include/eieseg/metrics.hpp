/* Copyright 2026 The eieseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Segmentation and lane metrics: per-class IoU / mIoU, pixel F1, TuSimple
// point accuracy, IoU-matched lane F1, and row-center lane extraction.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "eieseg/field.hpp"

namespace eieseg {

struct ConfusionCounts {
  std::vector<std::size_t> tp;
  std::vector<std::size_t> fp;
  std::vector<std::size_t> fn;

  explicit ConfusionCounts(std::size_t classes = 0) : tp(classes, 0), fp(classes, 0), fn(classes, 0) {}

  std::size_t classes() const { return tp.size(); }

  // Accumulates one image. Ignored ground-truth pixels are skipped.
  void add(const ClassMap& pred, const LabelStack& gt) {
    if (pred.height != gt.height() || pred.width != gt.width()) {
      throw DimensionError("ConfusionCounts: prediction and ground truth dims differ");
    }
    for (std::size_t p = 0; p < pred.labels.size(); ++p) {
      const int t = gt.label_at(p);
      if (t == kIgnoreLabel) continue;
      const int q = pred.labels[p];
      if (q == t) {
        ++tp[static_cast<std::size_t>(t)];
      } else {
        ++fn[static_cast<std::size_t>(t)];
        if (q >= 0 && static_cast<std::size_t>(q) < classes()) ++fp[static_cast<std::size_t>(q)];
      }
    }
  }
};

struct IouReport {
  // NaN for classes absent from both prediction and ground truth.
  std::vector<double> per_class;
  double miou = 0.0;
};

inline IouReport iou_from_counts(const ConfusionCounts& counts) {
  IouReport r;
  r.per_class.resize(counts.classes(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t included = 0;
  for (std::size_t c = 0; c < counts.classes(); ++c) {
    const std::size_t denom = counts.tp[c] + counts.fp[c] + counts.fn[c];
    if (denom == 0) continue;
    r.per_class[c] = static_cast<double>(counts.tp[c]) / static_cast<double>(denom);
    sum += r.per_class[c];
    ++included;
  }
  r.miou = included == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(included);
  return r;
}

inline IouReport iou_scores(const ClassMap& pred, const LabelStack& gt) {
  ConfusionCounts counts(gt.classes());
  counts.add(pred, gt);
  return iou_from_counts(counts);
}

// Masks are binary fields; a pixel is set when its value exceeds 0.5.
inline double pixel_f1(const Field2D& pred, const Field2D& gt) {
  require_same_shape(pred, gt, "pixel_f1");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] > 0.5;
    const bool g = gt[i] > 0.5;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  if (tp + fp == 0 && tp + fn == 0) return 1.0;
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

struct LanePoint {
  int row = 0;
  std::optional<int> col;  // nullopt = missing
};

using Lane = std::vector<LanePoint>;
using LanePoints = std::vector<Lane>;

inline constexpr int kDefaultTuSimpleTolerancePx = 5;

// pred[i] is scored against gt[i]; a missing predicted lane scores zero.
inline double tusimple_accuracy(const LanePoints& pred, const LanePoints& gt, int tol_px) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t l = 0; l < gt.size(); ++l) {
    for (const LanePoint& g : gt[l]) {
      if (!g.col) continue;
      ++total;
      if (l >= pred.size()) continue;
      for (const LanePoint& p : pred[l]) {
        if (p.row == g.row) {
          if (p.col && std::abs(*p.col - *g.col) <= tol_px) ++correct;
          break;
        }
      }
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

// Mean |col difference| over rows where both lanes have a point; +inf when no
// row is shared.
inline double lane_distance(const Lane& a, const Lane& b) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const LanePoint& p : a) {
    if (!p.col) continue;
    for (const LanePoint& q : b) {
      if (q.row == p.row) {
        if (q.col) {
          sum += std::abs(*p.col - *q.col);
          ++n;
        }
        break;
      }
    }
  }
  return n == 0 ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(n);
}

// Greedy one-to-one matching: repeatedly pairs the closest (pred, gt) lanes
// by lane_distance. Returns pred reordered to align with gt; unmatched gt
// slots receive an empty lane. Ties resolve to the lowest gt, then pred index.
inline LanePoints match_lanes_greedy(const LanePoints& pred, const LanePoints& gt) {
  LanePoints aligned(gt.size());
  std::vector<bool> pred_used(pred.size(), false);
  std::vector<bool> gt_used(gt.size(), false);
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bg = 0, bp = 0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt_used[g]) continue;
      for (std::size_t p = 0; p < pred.size(); ++p) {
        if (pred_used[p]) continue;
        const double d = lane_distance(pred[p], gt[g]);
        if (d < best) {
          best = d;
          bg = g;
          bp = p;
        }
      }
    }
    if (!std::isfinite(best)) break;
    aligned[bg] = pred[bp];
    gt_used[bg] = true;
    pred_used[bp] = true;
  }
  return aligned;
}

// One point per row: floor of the midpoint of the leftmost and rightmost
// columns whose probability exceeds the threshold.
inline Lane lane_coordinates(const Field2D& prob, double threshold) {
  Lane lane;
  lane.reserve(prob.height());
  for (std::size_t y = 0; y < prob.height(); ++y) {
    long lo = -1, hi = -1;
    for (std::size_t x = 0; x < prob.width(); ++x) {
      if (prob(y, x) > threshold) {
        if (lo < 0) lo = static_cast<long>(x);
        hi = static_cast<long>(x);
      }
    }
    LanePoint pt{static_cast<int>(y), std::nullopt};
    if (lo >= 0) pt.col = static_cast<int>((lo + hi) / 2);
    lane.push_back(pt);
  }
  return lane;
}

inline double mask_iou(const Field2D& a, const Field2D& b) {
  require_same_shape(a, b, "mask_iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool p = a[i] > 0.5;
    const bool q = b[i] > 0.5;
    inter += p && q;
    uni += p || q;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct LaneF1 {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double f1 = 0.0;
};

// CULane-style F1 approximated on per-lane pixel masks: lanes are matched
// greedily by descending mask IoU and a match counts when IoU >= threshold.
inline LaneF1 lane_f1(const std::vector<Field2D>& pred, const std::vector<Field2D>& gt,
                      double iou_threshold = 0.5) {
  struct Pair {
    double iou;
    std::size_t p, g;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < pred.size(); ++p)
    for (std::size_t g = 0; g < gt.size(); ++g) pairs.push_back({mask_iou(pred[p], gt[g]), p, g});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
  std::vector<bool> pu(pred.size(), false), gu(gt.size(), false);
  LaneF1 r;
  for (const Pair& pr : pairs) {
    if (pr.iou < iou_threshold) break;
    if (pu[pr.p] || gu[pr.g]) continue;
    pu[pr.p] = gu[pr.g] = true;
    ++r.tp;
  }
  r.fp = pred.size() - r.tp;
  r.fn = gt.size() - r.tp;
  const std::size_t denom = 2 * r.tp + r.fp + r.fn;
  r.f1 = denom == 0 ? 1.0 : 2.0 * static_cast<double>(r.tp) / static_cast<double>(denom);
  return r;
}

}  // namespace eieseg
