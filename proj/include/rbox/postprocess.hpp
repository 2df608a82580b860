// postprocess.hpp
// Class-wise rotated NMS and merging of per-patch detections back into
// source-image coordinates.

#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "rbox/geometry.hpp"

namespace rbox {

struct Detection {
  Obb obb;
  int class_index = 0;
  double score = 0.0;
};

struct PatchOrigin {
  double offset_x = 0.0;
  double offset_y = 0.0;
};

// Greedy class-wise suppression: detections are visited in descending score
// order (ties by input position) and kept iff their IoU with every kept
// detection of the same class stays strictly below the threshold. The output
// preserves that order.
inline std::vector<Detection> rotated_nms(const std::vector<Detection>& dets,
                                          double iou_threshold) {
  if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("rotated_nms: threshold outside [0, 1]");
  }
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });

  std::vector<Detection> kept;
  std::vector<Polygon> kept_corners;
  for (size_t idx : order) {
    const Polygon corners = obb_corners(dets[idx].obb);
    bool suppressed = false;
    for (size_t k = 0; k < kept.size() && !suppressed; ++k) {
      if (kept[k].class_index != dets[idx].class_index) continue;
      suppressed = polygon_iou(kept_corners[k], corners) >= iou_threshold;
    }
    if (!suppressed) {
      kept.push_back(dets[idx]);
      kept_corners.push_back(corners);
    }
  }
  return kept;
}

// Translates each patch's detections by its origin, drops scores below the
// confidence threshold, and suppresses duplicates across patches. The union
// is put into a canonical order first so the result does not depend on how
// patches were enumerated.
inline std::vector<Detection> merge_patches(
    const std::vector<std::pair<PatchOrigin, std::vector<Detection>>>& per_patch,
    double iou_threshold, double score_threshold) {
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw std::invalid_argument("merge_patches: score threshold outside [0, 1]");
  }
  std::vector<Detection> pool;
  for (const auto& [origin, dets] : per_patch) {
    for (const Detection& det : dets) {
      if (det.score < score_threshold) continue;
      Detection moved = det;
      moved.obb = Obb(det.obb.cx + origin.offset_x, det.obb.cy + origin.offset_y,
                      det.obb.w, det.obb.h, det.obb.theta);
      pool.push_back(moved);
    }
  }
  std::sort(pool.begin(), pool.end(), [](const Detection& a, const Detection& b) {
    return std::tie(b.score, a.class_index, a.obb.cx, a.obb.cy, a.obb.w, a.obb.h, a.obb.theta) <
           std::tie(a.score, b.class_index, b.obb.cx, b.obb.cy, b.obb.w, b.obb.h, b.obb.theta);
  });
  return rotated_nms(pool, iou_threshold);
}

}  // namespace rbox
