// losses.hpp
// Quality focal loss, the Hellinger-distance box similarity (ProbIoU) with
// its analytic gradient, and the combined detection loss.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rbox/assignment.hpp"
#include "rbox/geometry.hpp"

namespace rbox {

struct LossConfig {
  double beta = 2.0;  // QFL down-weighting exponent
  double eps = 1e-7;  // log/sqrt guard

  void validate() const {
    if (!(beta >= 0.0)) throw std::invalid_argument("LossConfig: beta must be nonnegative");
    if (!(eps > 0.0 && eps < 1e-3)) throw std::invalid_argument("LossConfig: eps outside (0, 1e-3)");
  }
};

// Quality focal loss. The log arguments are clamped into [eps, 1-eps]; the
// |y - sigma| modulator is not, so the loss vanishes exactly at sigma = y.
inline double qfl(double sigma, double y, const LossConfig& cfg = {}) {
  cfg.validate();
  const double s = std::clamp(sigma, cfg.eps, 1.0 - cfg.eps);
  const double modulator = std::pow(std::abs(y - sigma), cfg.beta);
  return -modulator * ((1.0 - y) * std::log1p(-s) + y * std::log(s));
}

namespace detail {

// Bhattacharyya distance between the unshrunk Gaussians of two boxes.
inline double bhattacharyya_distance(const Gaussian2& g1, const Gaussian2& g2, double eps) {
  const double det_floor = eps * eps;
  const Mat2 mixed = (g1.sigma + g2.sigma) * 0.5;
  const Vec2 d = g1.mu - g2.mu;
  const Mat2 mixed_inv = mixed.inverse(det_floor);
  const double det_mixed = std::max(mixed.det(), det_floor);
  const double det1 = std::max(g1.sigma.det(), det_floor);
  const double det2 = std::max(g2.sigma.det(), det_floor);
  const double dist = 0.125 * d.dot(mixed_inv * d) +
                      0.5 * std::log(det_mixed) - 0.25 * std::log(det1) - 0.25 * std::log(det2);
  return std::max(dist, 0.0);
}

}  // namespace detail

// Similarity in [0, 1]: 1 - H, where H is the Hellinger distance between the
// Gaussians of the two boxes. Equals 1 iff the boxes define the same
// Gaussian and tends to 0 as they separate.
inline double prob_iou(const Obb& a, const Obb& b, double eps = 1e-7) {
  const double bd = detail::bhattacharyya_distance(obb_to_gaussian(a, false),
                                                   obb_to_gaussian(b, false), eps);
  const double bc = std::exp(-bd);
  const double hellinger = std::sqrt(std::max(1.0 - bc, 0.0));
  return std::clamp(1.0 - hellinger, 0.0, 1.0);
}

inline double prob_iou_loss(const Obb& pred, const Obb& gt, double eps = 1e-7) {
  return 1.0 - prob_iou(pred, gt, eps);
}

struct ProbIouGrad {
  std::array<double, 5> d{};  // d/d(cx, cy, w, h, theta) of prob_iou_loss(pred, gt)
  bool degenerate = false;    // pred ~ gt: the sqrt in H is singular there
};

// Analytic gradient of prob_iou_loss with respect to the predicted box
// parameters, chained through the Gaussian covariance. Near the H = 0
// singularity (pred equal to gt) the gradient is reported as degenerate and
// zeroed.
inline ProbIouGrad prob_iou_grad(const Obb& pred, const Obb& gt, double eps = 1e-7) {
  const Gaussian2 g1 = obb_to_gaussian(pred, false);
  const Gaussian2 g2 = obb_to_gaussian(gt, false);
  const double det_floor = eps * eps;

  const double bd = detail::bhattacharyya_distance(g1, g2, eps);
  const double bc = std::exp(-bd);
  const double hellinger = std::sqrt(std::max(1.0 - bc, 0.0));

  ProbIouGrad out;
  if (hellinger < eps) {
    out.degenerate = true;
    return out;
  }
  const double outer = bc / (2.0 * hellinger);  // dH/dB_D

  const Mat2 mixed_inv = ((g1.sigma + g2.sigma) * 0.5).inverse(det_floor);
  const Mat2 sigma1_inv = g1.sigma.inverse(det_floor);
  const Vec2 ad = mixed_inv * (g1.mu - g2.mu);

  // dB_D/dmu1 = 1/4 * mixed_inv * d
  out.d[0] = outer * 0.25 * ad.x;
  out.d[1] = outer * 0.25 * ad.y;

  // For a covariance perturbation M: dB_D = tr(G * M) with
  // G = 1/4 mixed_inv - 1/16 (mixed_inv d)(mixed_inv d)^T - 1/4 sigma1_inv.
  const Mat2 ad_outer{ad.x * ad.x, ad.x * ad.y, ad.y * ad.x, ad.y * ad.y};
  const Mat2 shape_grad = mixed_inv * 0.25 - ad_outer * (1.0 / 16.0) - sigma1_inv * 0.25;

  const Mat2 rot = Mat2::rotation(pred.theta);
  const Mat2 dsigma_dw = rot * Mat2::diagonal(pred.w / 6.0, 0.0) * rot.transpose();
  const Mat2 dsigma_dh = rot * Mat2::diagonal(0.0, pred.h / 6.0) * rot.transpose();
  const Mat2 spin{0.0, -1.0, 1.0, 0.0};
  const Mat2 dsigma_dtheta = spin * g1.sigma - g1.sigma * spin;

  out.d[2] = outer * (shape_grad * dsigma_dw).trace();
  out.d[3] = outer * (shape_grad * dsigma_dh).trace();
  out.d[4] = outer * (shape_grad * dsigma_dtheta).trace();
  return out;
}

// Per-level raw predictions: sigmoids laid out cell major then class
// (scores[cell * num_classes + k]) and one decoded box per cell.
struct LevelPrediction {
  std::vector<double> scores;
  std::vector<Obb> boxes;
};

struct LossReport {
  double cls_loss = 0.0;
  double reg_loss = 0.0;
  double total = 0.0;
  int n_pos = 0;
};

// Combined loss: QFL over every cell and class slot, averaged over the
// positive count, plus the IoU-weighted ProbIoU regression term over the
// positive cells normalized by the weight sum. The quality target y is the
// predicted-vs-target similarity at the positive cell's class slot and 0
// elsewhere. Cells are reduced row major per level, so the sums are
// reproducible.
inline LossReport total_loss(const std::vector<LevelPrediction>& preds, const AssignmentMap& map,
                             int num_classes, const LossConfig& cfg = {}) {
  cfg.validate();
  if (num_classes <= 0) throw std::invalid_argument("total_loss: num_classes must be positive");
  if (preds.size() != map.levels.size()) {
    throw std::invalid_argument("total_loss: prediction/assignment level count mismatch");
  }

  LossReport report;
  for (size_t li = 0; li < preds.size(); ++li) {
    const size_t cells = map.levels[li].cells.size();
    if (preds[li].boxes.size() != cells ||
        preds[li].scores.size() != cells * static_cast<size_t>(num_classes)) {
      throw std::invalid_argument("total_loss: prediction grid shape mismatch");
    }
    for (const auto& cell : map.levels[li].cells) {
      if (cell.positive() && cell.class_index >= num_classes) {
        throw std::invalid_argument("total_loss: class index outside score grid");
      }
      report.n_pos += cell.positive() ? 1 : 0;
    }
  }

  double cls_sum = 0.0;
  double reg_num = 0.0;
  double reg_den = 0.0;
  for (size_t li = 0; li < preds.size(); ++li) {
    const LevelPrediction& pred = preds[li];
    const auto& cells = map.levels[li].cells;
    for (size_t ci = 0; ci < cells.size(); ++ci) {
      const AssignedCell& cell = cells[ci];
      double quality = 0.0;
      if (cell.positive()) {
        quality = prob_iou(pred.boxes[ci], cell.target_obb, cfg.eps);
        reg_num += quality * (1.0 - quality);
        reg_den += quality;
      }
      const double* cell_scores = &pred.scores[ci * static_cast<size_t>(num_classes)];
      for (int k = 0; k < num_classes; ++k) {
        const double y = (cell.positive() && k == cell.class_index) ? quality : 0.0;
        cls_sum += qfl(cell_scores[k], y, cfg);
      }
    }
  }

  report.cls_loss = cls_sum / std::max(report.n_pos, 1);
  report.reg_loss = report.n_pos > 0 ? reg_num / std::max(reg_den, cfg.eps) : 0.0;
  report.total = report.cls_loss + report.reg_loss;
  return report;
}

}  // namespace rbox
