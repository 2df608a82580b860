// assignment.hpp
// Label assignment over a feature pyramid: ellipse center sampling, fuzzy
// sample resolution by the center-distance measure J, and multi-level
// sampling for narrow targets.

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rbox/geometry.hpp"

namespace rbox {

// exp(-1.5): the kernel value on the ellipse inscribed in the box. Thresholds
// below it would sample outside the box.
inline const double kInscribedKernel = std::exp(-1.5);

// One feature-pyramid level. Cell (r, c) has sampling-point pixel coordinates
// ((c + 0.5) * stride, (r + 0.5) * stride). The scale acceptance interval is
// (range_min, range_max].
struct LevelSpec {
  double stride = 8.0;
  int grid_h = 0;
  int grid_w = 0;
  double range_min = 0.0;
  double range_max = 64.0;

  Vec2 cell_point(int row, int col) const {
    return {(col + 0.5) * stride, (row + 0.5) * stride};
  }

  void validate() const {
    if (!(stride > 0.0)) throw std::invalid_argument("LevelSpec: stride must be positive");
    if (grid_h <= 0 || grid_w <= 0) throw std::invalid_argument("LevelSpec: empty grid");
    if (!(range_min < range_max)) {
      throw std::invalid_argument("LevelSpec: range_min must be below range_max");
    }
  }
};

inline void validate_pyramid(const std::vector<LevelSpec>& levels) {
  if (levels.empty()) throw std::invalid_argument("pyramid: no levels");
  for (size_t i = 0; i < levels.size(); ++i) {
    levels[i].validate();
    if (i > 0 && !(levels[i].stride > levels[i - 1].stride)) {
      throw std::invalid_argument("pyramid: strides must be strictly increasing");
    }
  }
}

struct AssignConfig {
  double c_threshold = 0.23;
  double mls_short_ratio = 2.0;
  bool use_shrink = true;
  // The center-distance measure J is defined from the unshrunk covariance;
  // set this to evaluate it with the shrunk form instead.
  bool j_use_shrink = false;

  void validate() const {
    if (!(c_threshold >= kInscribedKernel - 1e-12) || !(c_threshold <= 1.0)) {
      throw std::invalid_argument("AssignConfig: c_threshold outside [exp(-1.5), 1]");
    }
    if (!(mls_short_ratio > 0.0)) {
      throw std::invalid_argument("AssignConfig: mls_short_ratio must be positive");
    }
  }
};

struct GroundTruth {
  Obb obb;
  int class_index = 0;
};

struct AssignedCell {
  int target = -1;       // index into the target list, -1 for negative cells
  int class_index = -1;
  double j_value = 0.0;
  Obb target_obb;        // meaningful only when positive()

  bool positive() const { return target >= 0; }
};

struct LevelAssignment {
  LevelSpec spec;
  std::vector<AssignedCell> cells;  // row major

  const AssignedCell& at(int row, int col) const {
    return cells[static_cast<size_t>(row) * spec.grid_w + col];
  }
};

struct AssignmentMap {
  std::vector<LevelAssignment> levels;

  int positive_count() const {
    int n = 0;
    for (const auto& level : levels) {
      for (const auto& cell : level.cells) n += cell.positive() ? 1 : 0;
    }
    return n;
  }
};

// True iff x falls in the elliptical sampling region g(x) >= C of the box.
inline bool ellipse_region_test(const Obb& obb, Vec2 x, const AssignConfig& cfg) {
  cfg.validate();
  return gaussian_kernel(obb_to_gaussian(obb, cfg.use_shrink), x) >= cfg.c_threshold;
}

// Center-distance measure J(x) = sqrt(w*h) * f(x). Larger J means x sits
// closer to this target; overlapping targets are resolved by argmax J.
inline double center_distance_j(const Obb& obb, Vec2 x, bool use_shrink = false) {
  return std::sqrt(obb.area()) * gaussian_density(obb_to_gaussian(obb, use_shrink), x);
}

// Levels a target samples on: the base level whose acceptance interval
// contains the long edge, plus every level where the target is too narrow to
// sample (short edge / stride below the ratio) while its long edge exceeds
// that level's acceptance range.
inline std::vector<int> assign_levels(const Obb& obb, const std::vector<LevelSpec>& levels,
                                      const AssignConfig& cfg) {
  validate_pyramid(levels);
  cfg.validate();
  const double long_edge = obb.long_edge();
  const double short_edge = obb.short_edge();
  const int top = static_cast<int>(levels.size()) - 1;

  int base = -1;
  for (int i = 0; i <= top; ++i) {
    if (long_edge > levels[i].range_min && long_edge <= levels[i].range_max) {
      base = i;
      break;
    }
  }
  if (base < 0 && long_edge > levels[top].range_max) base = top;  // open upper range

  std::vector<int> out;
  for (int i = 0; i <= top; ++i) {
    const bool mls = short_edge / levels[i].stride < cfg.mls_short_ratio &&
                     long_edge > levels[i].range_max;
    if (i == base || mls) out.push_back(i);
  }
  return out;
}

// Builds the per-level assignment map. A cell is positive when at least one
// target sampling on that level passes the ellipse test at the cell's point;
// among candidates the largest J wins, ties going to the smaller area and
// then the lower target index. Cells are visited row major, so the result is
// reproducible.
inline AssignmentMap build_assignment(const std::vector<GroundTruth>& targets,
                                      const std::vector<LevelSpec>& levels,
                                      const AssignConfig& cfg) {
  validate_pyramid(levels);
  cfg.validate();
  const size_t n_levels = levels.size();
  const size_t n_targets = targets.size();

  std::vector<Gaussian2> sample_gauss(n_targets);
  std::vector<Gaussian2> j_gauss(n_targets);
  std::vector<std::vector<char>> on_level(n_targets, std::vector<char>(n_levels, 0));
  for (size_t t = 0; t < n_targets; ++t) {
    sample_gauss[t] = obb_to_gaussian(targets[t].obb, cfg.use_shrink);
    j_gauss[t] = obb_to_gaussian(targets[t].obb, cfg.j_use_shrink);
    for (int level : assign_levels(targets[t].obb, levels, cfg)) {
      on_level[t][level] = 1;
    }
  }

  AssignmentMap map;
  map.levels.resize(n_levels);
  for (size_t li = 0; li < n_levels; ++li) {
    LevelAssignment& level = map.levels[li];
    level.spec = levels[li];
    level.cells.assign(static_cast<size_t>(level.spec.grid_h) * level.spec.grid_w, {});
    for (int r = 0; r < level.spec.grid_h; ++r) {
      for (int c = 0; c < level.spec.grid_w; ++c) {
        const Vec2 x = level.spec.cell_point(r, c);
        AssignedCell best;
        for (size_t t = 0; t < n_targets; ++t) {
          if (!on_level[t][li]) continue;
          if (gaussian_kernel(sample_gauss[t], x) < cfg.c_threshold) continue;
          const double j = std::sqrt(targets[t].obb.area()) * gaussian_density(j_gauss[t], x);
          bool wins = !best.positive();
          if (!wins && j != best.j_value) wins = j > best.j_value;
          if (!wins && j == best.j_value) {
            wins = targets[t].obb.area() < targets[best.target].obb.area();
          }
          if (wins) {
            best.target = static_cast<int>(t);
            best.class_index = targets[t].class_index;
            best.j_value = j;
            best.target_obb = targets[t].obb;
          }
        }
        level.cells[static_cast<size_t>(r) * level.spec.grid_w + c] = best;
      }
    }
  }
  return map;
}

// Targets that received no positive cell anywhere in the map.
inline std::vector<int> unassigned_targets(const AssignmentMap& map, size_t n_targets) {
  std::vector<char> seen(n_targets, 0);
  for (const auto& level : map.levels) {
    for (const auto& cell : level.cells) {
      if (cell.positive()) seen[cell.target] = 1;
    }
  }
  std::vector<int> out;
  for (size_t t = 0; t < n_targets; ++t) {
    if (!seen[t]) out.push_back(static_cast<int>(t));
  }
  return out;
}

}  // namespace rbox
