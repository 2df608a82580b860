// eval.hpp
// Rotated-box average precision under the VOC2007 (11-point) and VOC2012
// (area-under-envelope) protocols, with greedy score-ordered matching.

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rbox/geometry.hpp"
#include "rbox/postprocess.hpp"

namespace rbox {

enum class Metric { kVoc07, kVoc12 };

enum class MatchLabel { kTruePositive, kFalsePositive, kIgnored };

struct EvalConfig {
  double iou_threshold = 0.5;
  Metric metric = Metric::kVoc07;
  bool skip_difficult = true;

  void validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
      throw std::invalid_argument("EvalConfig: iou_threshold outside (0, 1)");
    }
  }
};

struct EvalBox {
  Obb obb;
  bool difficult = false;
};

// Greedy matching for one class on one image. Detections are processed in
// descending score order; each takes the available ground truth with the
// highest IoU when that IoU reaches the threshold. With skip_difficult,
// difficult ground truths absorb detections without producing either label
// and are never used up. Labels come back aligned with the input order.
inline std::vector<MatchLabel> match_detections(const std::vector<Detection>& dets,
                                                const std::vector<EvalBox>& gts,
                                                const EvalConfig& cfg = {}) {
  cfg.validate();
  std::vector<size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return dets[a].score > dets[b].score; });

  std::vector<Polygon> gt_corners;
  gt_corners.reserve(gts.size());
  for (const EvalBox& gt : gts) gt_corners.push_back(obb_corners(gt.obb));

  std::vector<char> taken(gts.size(), 0);
  std::vector<MatchLabel> labels(dets.size(), MatchLabel::kFalsePositive);
  for (size_t idx : order) {
    const Polygon corners = obb_corners(dets[idx].obb);
    double best_iou = 0.0;
    int best_gt = -1;
    for (size_t g = 0; g < gts.size(); ++g) {
      const bool ignorable = cfg.skip_difficult && gts[g].difficult;
      if (taken[g] && !ignorable) continue;
      const double iou = polygon_iou(corners, gt_corners[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt < 0 || best_iou < cfg.iou_threshold) {
      labels[idx] = MatchLabel::kFalsePositive;
    } else if (cfg.skip_difficult && gts[best_gt].difficult) {
      labels[idx] = MatchLabel::kIgnored;
    } else {
      labels[idx] = MatchLabel::kTruePositive;
      taken[best_gt] = 1;
    }
  }
  return labels;
}

namespace detail {

// Precision/recall points along the score-ranked detections, ignored
// entries excluded.
inline std::vector<std::pair<double, double>> pr_points(
    std::vector<std::pair<double, MatchLabel>> scored, int n_positives) {
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::pair<double, double>> points;  // (recall, precision)
  int tp = 0;
  int fp = 0;
  for (const auto& [score, label] : scored) {
    if (label == MatchLabel::kIgnored) continue;
    (label == MatchLabel::kTruePositive ? tp : fp) += 1;
    const double recall = n_positives > 0 ? static_cast<double>(tp) / n_positives : 0.0;
    const double precision = static_cast<double>(tp) / (tp + fp);
    points.emplace_back(recall, precision);
  }
  return points;
}

}  // namespace detail

// Average precision from scored match labels. VOC07 takes the mean of the
// interpolated precision at recalls {0, 0.1, ..., 1.0}; VOC12 integrates the
// monotonized precision envelope over all recall points.
inline double average_precision(const std::vector<std::pair<double, MatchLabel>>& scored_labels,
                                int n_positives, Metric metric) {
  if (n_positives < 0) throw std::invalid_argument("average_precision: negative positive count");
  const auto points = detail::pr_points(scored_labels, n_positives);
  if (points.empty() || n_positives == 0) return 0.0;

  if (metric == Metric::kVoc07) {
    double acc = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double t = 0.1 * i;
      double best = 0.0;
      for (const auto& [recall, precision] : points) {
        if (recall >= t - 1e-12) best = std::max(best, precision);
      }
      acc += best;
    }
    return acc / 11.0;
  }

  // Monotone envelope from the right, then the area under it.
  std::vector<std::pair<double, double>> env = points;
  for (size_t i = env.size() - 1; i-- > 0;) {
    env[i].second = std::max(env[i].second, env[i + 1].second);
  }
  double area = 0.0;
  double prev_recall = 0.0;
  for (const auto& [recall, precision] : env) {
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

// Arithmetic mean over per-class APs. Which classes participate is the
// caller's policy (see evaluate_dataset).
inline double mean_ap(const std::vector<double>& per_class_aps) {
  if (per_class_aps.empty()) throw std::invalid_argument("mean_ap: no classes");
  return std::accumulate(per_class_aps.begin(), per_class_aps.end(), 0.0) /
         static_cast<double>(per_class_aps.size());
}

struct ClassEval {
  std::string name;
  int n_gt = 0;   // non-difficult ground truths
  int n_det = 0;
  double ap = 0.0;
};

struct DatasetEval {
  std::vector<ClassEval> per_class;
  double map = 0.0;
};

struct ImageEvalInput {
  std::vector<Detection> detections;                       // class_index into class_names
  std::vector<std::pair<int, EvalBox>> ground_truths;      // (class_index, box)
};

// Full-dataset evaluation: per-image greedy matching, detections pooled per
// class across images, one AP per class. Classes with neither ground truth
// nor detections are excluded from the mean unless include_empty_classes.
inline DatasetEval evaluate_dataset(const std::map<std::string, ImageEvalInput>& images,
                                    const std::vector<std::string>& class_names,
                                    const EvalConfig& cfg = {},
                                    bool include_empty_classes = false) {
  cfg.validate();
  const int n_classes = static_cast<int>(class_names.size());
  if (n_classes == 0) throw std::invalid_argument("evaluate_dataset: no classes");

  DatasetEval result;
  std::vector<double> aps;
  for (int cls = 0; cls < n_classes; ++cls) {
    ClassEval ce;
    ce.name = class_names[cls];
    std::vector<std::pair<double, MatchLabel>> pooled;
    for (const auto& [image_id, input] : images) {
      std::vector<Detection> dets;
      for (const Detection& det : input.detections) {
        if (det.class_index == cls) dets.push_back(det);
      }
      std::vector<EvalBox> gts;
      for (const auto& [gt_cls, box] : input.ground_truths) {
        if (gt_cls == cls) gts.push_back(box);
      }
      const std::vector<MatchLabel> labels = match_detections(dets, gts, cfg);
      for (size_t i = 0; i < dets.size(); ++i) {
        pooled.emplace_back(dets[i].score, labels[i]);
      }
      for (const EvalBox& gt : gts) {
        if (!(cfg.skip_difficult && gt.difficult)) ++ce.n_gt;
      }
      ce.n_det += static_cast<int>(dets.size());
    }
    ce.ap = average_precision(pooled, ce.n_gt, cfg.metric);
    if (include_empty_classes || ce.n_gt > 0 || ce.n_det > 0) {
      aps.push_back(ce.ap);
    }
    result.per_class.push_back(std::move(ce));
  }
  result.map = aps.empty() ? 0.0 : mean_ap(aps);
  return result;
}

}  // namespace rbox
