// geometry.hpp
// Oriented bounding boxes, their 2D Gaussian form, and exact convex-polygon
// operations (clipping, IoU, minimum-area enclosing rectangle).
//
// Conventions: an Obb stores (cx, cy, w, h, theta) with theta in [0, pi/2),
// where w is the edge rotated by theta from the x-axis and h the
// perpendicular edge. Angles are reduced modulo pi/2 at construction.
// Polygons are vertex lists in counterclockwise order.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace rbox {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

// 2x2 matrix, row major.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  static Mat2 rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c, -s, s, c};
  }
  static Mat2 diagonal(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }

  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }

  Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
  Mat2 operator+(const Mat2& o) const {
    return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
  }
  Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }

  // Closed-form adjugate inverse; the determinant is floored to keep the
  // result finite for near-singular inputs.
  Mat2 inverse(double det_floor = 0.0) const {
    const double d = std::max(det(), det_floor);
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }

  // Eigenvalues of a symmetric matrix, descending.
  void symmetric_eigenvalues(double& lo, double& hi) const {
    const double mean = 0.5 * trace();
    const double disc = std::sqrt(std::max(0.0, mean * mean - det()));
    hi = mean + disc;
    lo = mean - disc;
  }
};

// Reduces an angle into [0, pi/2).
inline double wrap_half_pi(double theta) {
  double r = std::fmod(theta, kHalfPi);
  if (r < 0.0) r += kHalfPi;
  if (r >= kHalfPi) r = 0.0;
  return r;
}

struct Obb {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;
  double theta = 0.0;

  Obb() = default;
  Obb(double cx_, double cy_, double w_, double h_, double theta_)
      : cx(cx_), cy(cy_), w(w_), h(h_), theta(wrap_half_pi(theta_)) {
    if (!(std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) &&
          std::isfinite(h) && std::isfinite(theta))) {
      throw std::invalid_argument("Obb: non-finite parameter");
    }
    if (!(w > 0.0 && h > 0.0)) {
      throw std::invalid_argument("Obb: width and height must be positive");
    }
  }

  Vec2 center() const { return {cx, cy}; }
  double area() const { return w * h; }
  double long_edge() const { return std::max(w, h); }
  double short_edge() const { return std::min(w, h); }
};

struct Gaussian2 {
  Vec2 mu;
  Mat2 sigma;  // symmetric positive definite
};

using Polygon = std::vector<Vec2>;

// Covariance of the Gaussian associated with an OBB. Unshrunk form uses
// Sigma0 = diag(w^2, h^2)/12; the shrunk form uses min(w,h)/12 * diag(w, h),
// which pulls the major axis of the exp(-1.5) contour in to sqrt(w*h) while
// leaving the minor axis at min(w, h).
inline Gaussian2 obb_to_gaussian(const Obb& obb, bool shrink) {
  Mat2 sigma0;
  if (shrink) {
    const double f = obb.short_edge() / 12.0;
    sigma0 = Mat2::diagonal(f * obb.w, f * obb.h);
  } else {
    sigma0 = Mat2::diagonal(obb.w * obb.w / 12.0, obb.h * obb.h / 12.0);
  }
  const Mat2 rot = Mat2::rotation(obb.theta);
  return {obb.center(), rot * sigma0 * rot.transpose()};
}

inline double gaussian_quadratic_form(const Gaussian2& g, Vec2 x) {
  const Vec2 d = x - g.mu;
  const Mat2 inv = g.sigma.inverse(std::numeric_limits<double>::min());
  return d.dot(inv * d);
}

// Normalized probability density.
inline double gaussian_density(const Gaussian2& g, Vec2 x) {
  const double det = std::max(g.sigma.det(), std::numeric_limits<double>::min());
  const double norm = 1.0 / (2.0 * kPi * std::sqrt(det));
  return norm * std::exp(-0.5 * gaussian_quadratic_form(g, x));
}

// Unnormalized kernel in (0, 1]; equals 1 exactly at x = mu.
inline double gaussian_kernel(const Gaussian2& g, Vec2 x) {
  return std::exp(-0.5 * gaussian_quadratic_form(g, x));
}

// Counterclockwise corners; the first edge (corner0 -> corner1) is the width
// edge, rotated by theta from the x-axis.
inline Polygon obb_corners(const Obb& obb) {
  const Mat2 rot = Mat2::rotation(obb.theta);
  const Vec2 c = obb.center();
  const double hw = 0.5 * obb.w;
  const double hh = 0.5 * obb.h;
  return {c + rot * Vec2{-hw, -hh}, c + rot * Vec2{hw, -hh},
          c + rot * Vec2{hw, hh}, c + rot * Vec2{-hw, hh}};
}

// Shoelace area, positive for counterclockwise vertex order.
inline double polygon_signed_area(const Polygon& poly) {
  const size_t n = poly.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    acc += poly[i].cross(poly[(i + 1) % n]);
  }
  return 0.5 * acc;
}

inline double polygon_area(const Polygon& poly) {
  return std::abs(polygon_signed_area(poly));
}

namespace detail {

inline Polygon oriented_ccw(const Polygon& poly) {
  if (polygon_signed_area(poly) < 0.0) {
    return Polygon(poly.rbegin(), poly.rend());
  }
  return poly;
}

// Clips `subject` by the half plane to the left of edge a -> b, boundary
// inclusive.
inline Polygon clip_half_plane(const Polygon& subject, Vec2 a, Vec2 b) {
  Polygon out;
  const size_t n = subject.size();
  if (n == 0) return out;
  out.reserve(n + 1);
  const Vec2 dir = b - a;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 cur = subject[i];
    const Vec2 nxt = subject[(i + 1) % n];
    const double side_cur = dir.cross(cur - a);
    const double side_nxt = dir.cross(nxt - a);
    if (side_cur >= 0.0) out.push_back(cur);
    if ((side_cur > 0.0 && side_nxt < 0.0) || (side_cur < 0.0 && side_nxt > 0.0)) {
      const double t = side_cur / (side_cur - side_nxt);
      out.push_back(cur + (nxt - cur) * t);
    }
  }
  return out;
}

}  // namespace detail

// Sutherland-Hodgman intersection of two convex polygons. Returns the
// (possibly empty) intersection polygon.
inline Polygon convex_intersection(const Polygon& a, const Polygon& b) {
  Polygon subject = detail::oriented_ccw(a);
  const Polygon clip = detail::oriented_ccw(b);
  if (clip.size() < 3) return {};
  for (size_t i = 0; i < clip.size() && subject.size() >= 3; ++i) {
    subject = detail::clip_half_plane(subject, clip[i], clip[(i + 1) % clip.size()]);
  }
  return subject.size() >= 3 ? subject : Polygon{};
}

namespace detail {

// Content-based ordering so binary operations can pick a canonical argument
// order regardless of how the caller passed the polygons.
inline bool polygon_less(const Polygon& a, const Polygon& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].x != b[i].x) return a[i].x < b[i].x;
    if (a[i].y != b[i].y) return a[i].y < b[i].y;
  }
  return false;
}

inline bool bounding_boxes_disjoint(const Polygon& a, const Polygon& b) {
  double a_lo_x = a[0].x, a_hi_x = a[0].x, a_lo_y = a[0].y, a_hi_y = a[0].y;
  for (const Vec2& p : a) {
    a_lo_x = std::min(a_lo_x, p.x);
    a_hi_x = std::max(a_hi_x, p.x);
    a_lo_y = std::min(a_lo_y, p.y);
    a_hi_y = std::max(a_hi_y, p.y);
  }
  double b_lo_x = b[0].x, b_hi_x = b[0].x, b_lo_y = b[0].y, b_hi_y = b[0].y;
  for (const Vec2& p : b) {
    b_lo_x = std::min(b_lo_x, p.x);
    b_hi_x = std::max(b_hi_x, p.x);
    b_lo_y = std::min(b_lo_y, p.y);
    b_hi_y = std::max(b_hi_y, p.y);
  }
  return a_hi_x < b_lo_x || b_hi_x < a_lo_x || a_hi_y < b_lo_y || b_hi_y < a_lo_y;
}

}  // namespace detail

// Exact IoU for convex polygons. Degenerate inputs (zero area) give 0. The
// clip runs in a canonical argument order, so the result is bitwise
// symmetric.
inline double polygon_iou(const Polygon& a, const Polygon& b) {
  const double area_a = polygon_area(a);
  const double area_b = polygon_area(b);
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  if (detail::bounding_boxes_disjoint(a, b)) return 0.0;
  const bool swap = detail::polygon_less(b, a);
  const double inter =
      polygon_area(swap ? convex_intersection(b, a) : convex_intersection(a, b));
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// Andrew monotone chain; returns a strictly convex hull in counterclockwise
// order (collinear points dropped).
inline Polygon convex_hull(Polygon pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 p, Vec2 q) {
    return p.x < q.x || (p.x == q.x && p.y < q.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Vec2 p, Vec2 q) { return p.x == q.x && p.y == q.y; }),
            pts.end());
  const size_t n = pts.size();
  if (n < 3) return pts;
  Polygon hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Minimum-area enclosing rectangle. One side of the optimum is collinear with
// a hull edge, so scanning hull edges is exact. Throws std::invalid_argument
// for degenerate (collinear) input.
inline Obb min_area_obb(const Polygon& poly) {
  const Polygon hull = convex_hull(poly);
  if (hull.size() < 3 || polygon_area(hull) <= 0.0) {
    throw std::invalid_argument("min_area_obb: degenerate polygon");
  }
  const size_t n = hull.size();
  double best_area = std::numeric_limits<double>::infinity();
  Vec2 best_u{1.0, 0.0};
  double best_lo_u = 0, best_hi_u = 0, best_lo_v = 0, best_hi_v = 0;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 edge = hull[(i + 1) % n] - hull[i];
    const double len = edge.norm();
    if (len <= 0.0) continue;
    const Vec2 u{edge.x / len, edge.y / len};
    const Vec2 v{-u.y, u.x};
    double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
    double lo_v = lo_u, hi_v = -lo_u;
    for (const Vec2& p : hull) {
      const double pu = p.dot(u);
      const double pv = p.dot(v);
      lo_u = std::min(lo_u, pu);
      hi_u = std::max(hi_u, pu);
      lo_v = std::min(lo_v, pv);
      hi_v = std::max(hi_v, pv);
    }
    const double area = (hi_u - lo_u) * (hi_v - lo_v);
    if (area < best_area) {
      best_area = area;
      best_u = u;
      best_lo_u = lo_u;
      best_hi_u = hi_u;
      best_lo_v = lo_v;
      best_hi_v = hi_v;
    }
  }
  const Vec2 v{-best_u.y, best_u.x};
  const Vec2 center = best_u * (0.5 * (best_lo_u + best_hi_u)) + v * (0.5 * (best_lo_v + best_hi_v));
  const double extent_u = best_hi_u - best_lo_u;
  const double extent_v = best_hi_v - best_lo_v;
  // Direction of the u-axis modulo pi; swap extents when the canonical angle
  // lands on the perpendicular edge.
  double phi = std::atan2(best_u.y, best_u.x);
  if (phi < 0.0) phi += kPi;
  if (phi >= kPi) phi -= kPi;
  if (phi < kHalfPi) {
    return Obb(center.x, center.y, extent_u, extent_v, phi);
  }
  return Obb(center.x, center.y, extent_v, extent_u, phi - kHalfPi);
}

// Rotates a box about a pivot. Re-canonicalizing the angle swaps the stored
// w/h whenever the quarter-turn count is odd, so the returned box covers
// exactly the rotated point set.
inline Obb rotate_obb(const Obb& obb, double angle, Vec2 pivot = {0.0, 0.0}) {
  const Vec2 c = pivot + Mat2::rotation(angle) * (obb.center() - pivot);
  const double raw = obb.theta + angle;
  const double reduced = wrap_half_pi(raw);
  const long long quarters = std::llround((raw - reduced) / kHalfPi);
  if (quarters % 2 == 0) {
    return Obb(c.x, c.y, obb.w, obb.h, reduced);
  }
  return Obb(c.x, c.y, obb.h, obb.w, reduced);
}

// Closed containment test; boundary points count as inside.
inline bool point_in_obb(const Obb& obb, Vec2 x, double tol = 1e-9) {
  const Mat2 rot = Mat2::rotation(obb.theta);
  const Vec2 local = rot.transpose() * (x - obb.center());
  return std::abs(local.x) <= 0.5 * obb.w + tol && std::abs(local.y) <= 0.5 * obb.h + tol;
}

}  // namespace rbox
