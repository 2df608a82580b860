// dataio.hpp
// DOTA-format annotation and result text I/O, tiling plans for large images,
// and the coordinate side of the two-step rotation augmentation. No pixels
// are touched anywhere in this module.

#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rbox/geometry.hpp"
#include "rbox/postprocess.hpp"

namespace rbox {

struct Annotation {
  Polygon quad;          // exactly 4 vertices, counterclockwise
  std::string category;
  int difficult = 0;
};

struct TileWindow {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
  double height = 0.0;
};

// Two-step rotation: a quarter turn drawn uniformly, then 30 or 60 degrees
// with probability one half.
struct RotationPlan {
  int coarse_deg = 0;  // 0, 90, 180 or 270
  int fine_deg = 0;    // 0, 30 or 60
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string tok;
  while (stream >> tok) tokens.push_back(tok);
  return tokens;
}

inline double parse_real(const std::string& tok, int line_no) {
  size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(line_no, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size() || !std::isfinite(value)) {
    throw ParseError(line_no, "expected a number, got '" + tok + "'");
  }
  return value;
}

}  // namespace detail

// Parses DOTA annotation text: optional "imagesource:"/"gsd:" header lines,
// then one annotation per line as 8 quad coordinates, a category token and a
// 0/1 difficult flag. Degenerate (zero-area) quads are rejected here rather
// than carried along. Quads are normalized to counterclockwise order.
inline std::vector<Annotation> parse_dota(std::string_view text) {
  std::vector<Annotation> out;
  std::istringstream stream{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("imagesource:", 0) == 0 || line.rfind("gsd:", 0) == 0) continue;
    const std::vector<std::string> tokens = detail::split_tokens(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 10) {
      throw ParseError(line_no, "expected 10 fields (8 coordinates, category, difficult), got " +
                                    std::to_string(tokens.size()));
    }
    Annotation annot;
    annot.quad.reserve(4);
    for (int i = 0; i < 4; ++i) {
      annot.quad.push_back({detail::parse_real(tokens[2 * i], line_no),
                            detail::parse_real(tokens[2 * i + 1], line_no)});
    }
    annot.category = tokens[8];
    if (tokens[9] == "0") {
      annot.difficult = 0;
    } else if (tokens[9] == "1") {
      annot.difficult = 1;
    } else {
      throw ParseError(line_no, "difficult flag must be 0 or 1, got '" + tokens[9] + "'");
    }
    if (polygon_area(annot.quad) <= 1e-9) {
      throw ParseError(line_no, "degenerate annotation (zero-area quad)");
    }
    annot.quad = detail::oriented_ccw(annot.quad);
    out.push_back(std::move(annot));
  }
  return out;
}

// Serializes annotations back to DOTA lines (coordinates with 3 decimals, so
// a parse/write cycle moves values by at most half of 1e-3 px).
inline std::string write_annotations(const std::vector<Annotation>& annots) {
  std::string out;
  for (const Annotation& annot : annots) {
    char buf[256];
    int n = 0;
    for (const Vec2& p : annot.quad) {
      n += std::snprintf(buf + n, sizeof(buf) - n, "%.3f %.3f ", p.x, p.y);
    }
    out += buf;
    out += annot.category;
    out += annot.difficult ? " 1\n" : " 0\n";
  }
  return out;
}

// One result line per detection in its class bucket:
//   image_id score x1 y1 x2 y2 x3 y3 x4 y4
// Scores carry 6 decimals, coordinates 3 (round-trips within 1e-3 px).
inline std::map<std::string, std::vector<std::string>> write_results(
    const std::vector<Detection>& dets, const std::vector<std::string>& class_names,
    const std::string& image_id) {
  std::map<std::string, std::vector<std::string>> out;
  for (const Detection& det : dets) {
    if (det.class_index < 0 || det.class_index >= static_cast<int>(class_names.size())) {
      throw std::invalid_argument("write_results: class index outside the category list");
    }
    const Polygon corners = obb_corners(det.obb);
    char buf[320];
    int n = std::snprintf(buf, sizeof(buf), "%s %.6f", image_id.c_str(), det.score);
    for (const Vec2& p : corners) {
      n += std::snprintf(buf + n, sizeof(buf) - n, " %.3f %.3f", p.x, p.y);
    }
    out[class_names[det.class_index]].push_back(buf);
  }
  return out;
}

// Window offsets step by patch - gap along each axis; the final offset is
// clamped to the image edge so the last window abuts it. Windows may extend
// past small images (consumers pad).
inline std::vector<TileWindow> tile_plan(double image_w, double image_h, double patch,
                                         double gap) {
  if (!(patch > gap && gap >= 0.0)) {
    throw std::invalid_argument("tile_plan: need patch > gap >= 0");
  }
  const double stride = patch - gap;
  const auto axis_offsets = [&](double dim) {
    std::vector<double> offsets;
    for (double off = 0.0; off + patch < dim; off += stride) offsets.push_back(off);
    const double last = std::max(0.0, dim - patch);
    if (offsets.empty() || offsets.back() != last) offsets.push_back(last);
    return offsets;
  };
  std::vector<TileWindow> windows;
  for (double y : axis_offsets(image_h)) {
    for (double x : axis_offsets(image_w)) {
      windows.push_back({x, y, patch, patch});
    }
  }
  return windows;
}

// Keeps annotations with at least min_fraction of their area inside the
// window, replaces them by the minimum-area rectangle of the clipped part,
// and translates into window coordinates. The difficult flag is carried.
inline std::vector<Annotation> clip_annotations(const std::vector<Annotation>& annots,
                                                const TileWindow& window, double min_fraction) {
  if (!(min_fraction >= 0.0 && min_fraction <= 1.0)) {
    throw std::invalid_argument("clip_annotations: min_fraction outside [0, 1]");
  }
  const Polygon window_quad{{window.x0, window.y0},
                            {window.x0 + window.width, window.y0},
                            {window.x0 + window.width, window.y0 + window.height},
                            {window.x0, window.y0 + window.height}};
  std::vector<Annotation> out;
  for (const Annotation& annot : annots) {
    const double full_area = polygon_area(annot.quad);
    if (full_area <= 0.0) continue;
    const Polygon clipped = convex_intersection(annot.quad, window_quad);
    const double kept_area = polygon_area(clipped);
    if (kept_area <= 0.0 || kept_area / full_area < min_fraction) continue;
    Polygon local;
    local.reserve(clipped.size());
    for (const Vec2& p : clipped) local.push_back({p.x - window.x0, p.y - window.y0});
    Annotation kept;
    kept.quad = obb_corners(min_area_obb(local));
    kept.category = annot.category;
    kept.difficult = annot.difficult;
    out.push_back(std::move(kept));
  }
  return out;
}

inline RotationPlan sample_rotation(std::mt19937_64& rng) {
  RotationPlan plan;
  plan.coarse_deg = 90 * static_cast<int>(std::uniform_int_distribution<int>(0, 3)(rng));
  if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
    plan.fine_deg = 30 * std::uniform_int_distribution<int>(1, 2)(rng);
  }
  return plan;
}

struct RotatedScene {
  std::vector<Annotation> annotations;
  double width = 0.0;
  double height = 0.0;
};

// Rotates all quad vertices about the image center by coarse + fine degrees
// (counterclockwise) and re-centers them in the axis-aligned frame enclosing
// the rotated image.
inline RotatedScene apply_rotation(const std::vector<Annotation>& annots, double image_w,
                                   double image_h, const RotationPlan& plan) {
  const double angle = (plan.coarse_deg + plan.fine_deg) * kPi / 180.0;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  RotatedScene scene;
  scene.width = image_w * std::abs(c) + image_h * std::abs(s);
  scene.height = image_w * std::abs(s) + image_h * std::abs(c);
  const Vec2 old_center{0.5 * image_w, 0.5 * image_h};
  const Vec2 new_center{0.5 * scene.width, 0.5 * scene.height};
  scene.annotations.reserve(annots.size());
  for (const Annotation& annot : annots) {
    Annotation rotated = annot;
    for (Vec2& p : rotated.quad) {
      const Vec2 d = p - old_center;
      p = new_center + Vec2{c * d.x - s * d.y, s * d.x + c * d.y};
    }
    scene.annotations.push_back(std::move(rotated));
  }
  return scene;
}

}  // namespace rbox
