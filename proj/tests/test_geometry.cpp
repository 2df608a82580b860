#include "rbox/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using rbox::Gaussian2;
using rbox::Obb;
using rbox::Polygon;
using rbox::Vec2;

namespace {

void expect_obb_near(const Obb& a, const Obb& b, double tol) {
  EXPECT_NEAR(a.cx, b.cx, tol);
  EXPECT_NEAR(a.cy, b.cy, tol);
  EXPECT_NEAR(a.w, b.w, tol);
  EXPECT_NEAR(a.h, b.h, tol);
  EXPECT_NEAR(a.theta, b.theta, tol);
}

Polygon unit_square_at(double cx, double cy, double side = 1.0) {
  const double r = 0.5 * side;
  return {{cx - r, cy - r}, {cx + r, cy - r}, {cx + r, cy + r}, {cx - r, cy + r}};
}

}  // namespace

TEST(Obb, CanonicalizesAngle) {
  EXPECT_NEAR(Obb(0, 0, 2, 1, 3 * rbox::kPi / 4).theta, rbox::kPi / 4, 1e-12);
  EXPECT_NEAR(Obb(0, 0, 2, 1, -0.3).theta, rbox::kHalfPi - 0.3, 1e-12);
  EXPECT_THROW(Obb(0, 0, 0.0, 1, 0), std::invalid_argument);
  EXPECT_THROW(Obb(0, 0, 1, -2, 0), std::invalid_argument);
  EXPECT_THROW(Obb(0, 0, 1, 1, std::nan("")), std::invalid_argument);
}

TEST(ObbToGaussian, UnshrunkSquare) {
  const Gaussian2 g = rbox::obb_to_gaussian(Obb(0, 0, 12, 12, 0), false);
  EXPECT_DOUBLE_EQ(g.sigma.a11, 12.0);
  EXPECT_DOUBLE_EQ(g.sigma.a22, 12.0);
  EXPECT_DOUBLE_EQ(g.sigma.a12, 0.0);
  EXPECT_DOUBLE_EQ(g.mu.x, 0.0);
}

TEST(ObbToGaussian, NearQuarterTurnSwapsDiagonal) {
  const Gaussian2 at_zero = rbox::obb_to_gaussian(Obb(0, 0, 40, 10, 0), false);
  const Gaussian2 near_quarter =
      rbox::obb_to_gaussian(Obb(0, 0, 40, 10, rbox::kHalfPi - 1e-9), false);
  EXPECT_NEAR(near_quarter.sigma.a11, at_zero.sigma.a22, 1e-4);
  EXPECT_NEAR(near_quarter.sigma.a22, at_zero.sigma.a11, 1e-4);
}

TEST(ObbToGaussian, ShrunkElongatedBox) {
  const Gaussian2 g = rbox::obb_to_gaussian(Obb(0, 0, 40, 10, 0), true);
  EXPECT_NEAR(g.sigma.a11, 400.0 / 12.0, 1e-12);
  EXPECT_NEAR(g.sigma.a22, 100.0 / 12.0, 1e-12);
}

TEST(GaussianDensity, CenterValueAndDecay) {
  const Gaussian2 g = rbox::obb_to_gaussian(Obb(0, 0, 12, 12, 0), false);
  EXPECT_NEAR(rbox::gaussian_density(g, {0, 0}), 1.0 / (24.0 * rbox::kPi), 1e-12);
  EXPECT_LT(rbox::gaussian_density(g, {1e4, 1e4}), 1e-300);
}

TEST(GaussianDensity, TranslationInvariant) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Obb o = oracle::random_obb(rng);
    const Vec2 t{13.5, -4.25};
    const Obb shifted(o.cx + t.x, o.cy + t.y, o.w, o.h, o.theta);
    const Vec2 x{o.cx + 3.0, o.cy - 2.0};
    EXPECT_NEAR(rbox::gaussian_density(rbox::obb_to_gaussian(o, false), x),
                rbox::gaussian_density(rbox::obb_to_gaussian(shifted, false), x + t), 1e-15);
  }
}

TEST(GaussianKernel, KnownValues) {
  const Gaussian2 square = rbox::obb_to_gaussian(Obb(0, 0, 12, 12, 0), false);
  EXPECT_DOUBLE_EQ(rbox::gaussian_kernel(square, {0, 0}), 1.0);
  EXPECT_NEAR(rbox::gaussian_kernel(square, {6, 0}), std::exp(-1.5), 1e-12);
  // With the shrunk covariance the exp(-1.5) contour crosses the long axis at
  // the sqrt(w*h)/2 point.
  const Gaussian2 shrunk = rbox::obb_to_gaussian(Obb(0, 0, 40, 10, 0), true);
  EXPECT_NEAR(rbox::gaussian_kernel(shrunk, {10, 0}), std::exp(-1.5), 1e-12);
}

TEST(GaussianKernel, MatchesScalarOracle) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const Obb o = oracle::random_obb(rng);
    std::uniform_real_distribution<double> offset(-60.0, 60.0);
    const Vec2 x{o.cx + offset(rng), o.cy + offset(rng)};
    for (bool shrink : {false, true}) {
      EXPECT_NEAR(rbox::gaussian_kernel(rbox::obb_to_gaussian(o, shrink), x),
                  oracle::kernel_from_obb(o, x.x, x.y, shrink), 1e-12);
    }
  }
}

TEST(GaussianKernel, RigidEquivariance) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> angle(-rbox::kPi, rbox::kPi);
  std::uniform_real_distribution<double> shift(-30.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const Obb o = oracle::random_obb(rng);
    const Vec2 x{o.cx + shift(rng) * 0.2, o.cy + shift(rng) * 0.2};
    const double phi = angle(rng);
    const Vec2 t{shift(rng), shift(rng)};
    const Obb moved = [&] {
      const Obb r = rbox::rotate_obb(o, phi);
      return Obb(r.cx + t.x, r.cy + t.y, r.w, r.h, r.theta);
    }();
    const rbox::Mat2 rot = rbox::Mat2::rotation(phi);
    const Vec2 moved_x = rot * x + t;
    for (bool shrink : {false, true}) {
      EXPECT_NEAR(rbox::gaussian_kernel(rbox::obb_to_gaussian(o, shrink), x),
                  rbox::gaussian_kernel(rbox::obb_to_gaussian(moved, shrink), moved_x), 1e-10);
    }
  }
}

TEST(GaussianKernel, ScaleInvariantAboutCenter) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> scale(0.1, 8.0);
  for (int i = 0; i < 200; ++i) {
    const Obb o = oracle::random_obb(rng);
    const double s = scale(rng);
    const Obb scaled(o.cx, o.cy, o.w * s, o.h * s, o.theta);
    const Vec2 d{4.0, -7.5};
    const Vec2 x = o.center() + d;
    const Vec2 scaled_x = o.center() + d * s;
    EXPECT_NEAR(rbox::gaussian_kernel(rbox::obb_to_gaussian(o, false), x),
                rbox::gaussian_kernel(rbox::obb_to_gaussian(scaled, false), scaled_x), 1e-12);
  }
}

TEST(GaussianKernel, InscribedContourTouchesEdgeMidpoints) {
  std::mt19937_64 rng(15);
  const double c0 = std::exp(-1.5);
  for (int i = 0; i < 100; ++i) {
    const Obb o = oracle::random_obb(rng);
    const Gaussian2 g = rbox::obb_to_gaussian(o, false);
    const rbox::Mat2 rot = rbox::Mat2::rotation(o.theta);
    const Vec2 c = o.center();
    for (const Vec2 local : {Vec2{0.5 * o.w, 0}, Vec2{-0.5 * o.w, 0}, Vec2{0, 0.5 * o.h},
                             Vec2{0, -0.5 * o.h}}) {
      EXPECT_NEAR(rbox::gaussian_kernel(g, c + rot * local), c0, 1e-12);
    }
    // elsewhere on the boundary the kernel stays strictly below exp(-1.5)
    for (double t : {-0.45, -0.2, 0.1, 0.33, 0.48}) {
      EXPECT_LT(rbox::gaussian_kernel(g, c + rot * Vec2{0.5 * o.w, t * o.h}), c0);
      EXPECT_LT(rbox::gaussian_kernel(g, c + rot * Vec2{t * o.w, 0.5 * o.h}), c0);
    }
  }
}

TEST(GaussianKernel, ContourInteriorLiesInsideBox) {
  std::mt19937_64 rng(16);
  const double c0 = std::exp(-1.5);
  for (int i = 0; i < 20; ++i) {
    const Obb o = oracle::random_obb(rng);
    const Gaussian2 g = rbox::obb_to_gaussian(o, false);
    const double reach = 0.75 * o.long_edge();
    for (int gy = 0; gy <= 60; ++gy) {
      for (int gx = 0; gx <= 60; ++gx) {
        const Vec2 x{o.cx + (gx / 30.0 - 1.0) * reach, o.cy + (gy / 30.0 - 1.0) * reach};
        if (rbox::gaussian_kernel(g, x) >= c0) {
          EXPECT_TRUE(rbox::point_in_obb(o, x));
        }
      }
    }
  }
}

TEST(ObbCorners, Examples) {
  const Polygon origin_square = rbox::obb_corners(Obb(0, 0, 2, 2, 0));
  ASSERT_EQ(origin_square.size(), 4u);
  EXPECT_NEAR(origin_square[0].x, -1.0, 1e-15);
  EXPECT_NEAR(origin_square[0].y, -1.0, 1e-15);
  EXPECT_NEAR(origin_square[2].x, 1.0, 1e-15);
  EXPECT_GT(rbox::polygon_signed_area(origin_square), 0.0);  // counterclockwise

  const Polygon shifted = rbox::obb_corners(Obb(5, 5, 2, 2, 0));
  EXPECT_NEAR(shifted[0].x, 4.0, 1e-15);
  EXPECT_NEAR(shifted[2].y, 6.0, 1e-15);

  const Polygon diamond = rbox::obb_corners(Obb(0, 0, 2, 2, rbox::kPi / 4));
  const double r = std::sqrt(2.0);
  EXPECT_NEAR(diamond[0].y, -r, 1e-12);
  EXPECT_NEAR(diamond[1].x, r, 1e-12);
  EXPECT_NEAR(diamond[2].y, r, 1e-12);
  EXPECT_NEAR(diamond[3].x, -r, 1e-12);
}

TEST(PolygonIou, Examples) {
  const Polygon a = unit_square_at(0, 0);
  EXPECT_DOUBLE_EQ(rbox::polygon_iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(rbox::polygon_iou(a, unit_square_at(5, 5)), 0.0);
  EXPECT_NEAR(rbox::polygon_iou(a, unit_square_at(0.5, 0)), 1.0 / 3.0, 1e-12);
}

TEST(PolygonIou, DegenerateInputGivesZero) {
  const Polygon line{{0, 0}, {1, 0}, {2, 0}};
  EXPECT_DOUBLE_EQ(rbox::polygon_iou(line, unit_square_at(0, 0)), 0.0);
}

TEST(PolygonIou, SymmetricAndEqualUpToVertexRotation) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const Polygon a = rbox::obb_corners(oracle::random_obb(rng, -10, 10, 4, 30));
    const Polygon b = rbox::obb_corners(oracle::random_obb(rng, -10, 10, 4, 30));
    EXPECT_DOUBLE_EQ(rbox::polygon_iou(a, b), rbox::polygon_iou(b, a));
    const Polygon rotated{a[2], a[3], a[0], a[1]};
    EXPECT_DOUBLE_EQ(rbox::polygon_iou(a, rotated), 1.0);
  }
}

TEST(PolygonIou, MatchesMonteCarloOracle) {
  std::mt19937_64 rng(18);
  for (int i = 0; i < 12; ++i) {
    // keep the pair close so the intersection is usually nonempty
    const Polygon a = rbox::obb_corners(oracle::random_obb(rng, -6, 6, 8, 30));
    const Polygon b = rbox::obb_corners(oracle::random_obb(rng, -6, 6, 8, 30));
    const double exact = rbox::polygon_iou(a, b);
    const double mc = oracle::monte_carlo_iou(a, b, rng);
    EXPECT_NEAR(exact, mc, 1e-3);
  }
}

TEST(MinAreaObb, AxisAlignedRectangle) {
  const Obb got = rbox::min_area_obb({{1, 2}, {7, 2}, {7, 5}, {1, 5}});
  expect_obb_near(got, Obb(4, 3.5, 6, 3, 0), 1e-12);
}

TEST(MinAreaObb, RoundTripsObbCorners) {
  expect_obb_near(rbox::min_area_obb(rbox::obb_corners(Obb(3, 4, 10, 6, 0.7))),
                  Obb(3, 4, 10, 6, 0.7), 1e-9);
  std::mt19937_64 rng(19);
  for (int i = 0; i < 300; ++i) {
    const Obb o = oracle::random_nonsquare_obb(rng);
    expect_obb_near(rbox::min_area_obb(rbox::obb_corners(o)), o, 1e-9);
  }
}

TEST(MinAreaObb, RejectsDegenerateInput) {
  EXPECT_THROW(rbox::min_area_obb({{0, 0}, {1, 1}, {2, 2}}), std::invalid_argument);
  EXPECT_THROW(rbox::min_area_obb({{0, 0}, {1, 1}}), std::invalid_argument);
}

TEST(MinAreaObb, HullBeatsAnyAxisAlignedBox) {
  // a tilted sliver: the rotated rectangle must be no larger than the AABB
  const Obb o(0, 0, 30, 4, 0.6);
  const Polygon corners = rbox::obb_corners(o);
  const Obb rect = rbox::min_area_obb(corners);
  double lo_x = corners[0].x, hi_x = lo_x, lo_y = corners[0].y, hi_y = lo_y;
  for (const Vec2& p : corners) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  EXPECT_LE(rect.area(), (hi_x - lo_x) * (hi_y - lo_y) + 1e-9);
}

TEST(PointInObb, BoundaryInclusive) {
  const Obb o(10, 20, 8, 4, 0.5);
  EXPECT_TRUE(rbox::point_in_obb(o, {10, 20}));
  for (const Vec2& corner : rbox::obb_corners(o)) {
    EXPECT_TRUE(rbox::point_in_obb(o, corner));
  }
  EXPECT_FALSE(rbox::point_in_obb(Obb(10, 20, 8, 4, 0), {10 + 8, 20}));
}

TEST(RotateObb, PreservesPointSet) {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> angle(-2.0 * rbox::kPi, 2.0 * rbox::kPi);
  for (int i = 0; i < 200; ++i) {
    const Obb o = oracle::random_obb(rng);
    const double phi = angle(rng);
    const Obb rotated = rbox::rotate_obb(o, phi, {5.0, -3.0});
    const rbox::Mat2 rot = rbox::Mat2::rotation(phi);
    for (const Vec2& corner : rbox::obb_corners(o)) {
      const Vec2 moved = Vec2{5.0, -3.0} + rot * (corner - Vec2{5.0, -3.0});
      EXPECT_TRUE(rbox::point_in_obb(rotated, moved, 1e-7));
    }
    EXPECT_NEAR(rotated.area(), o.area(), 1e-9);
  }
}
