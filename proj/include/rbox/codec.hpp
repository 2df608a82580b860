// codec.hpp
// Converts raw regression-head outputs into oriented boxes:
//   offset = reg_xy * k * stride
//   w, h   = (elu(reg_wh * k) + 1) * stride
//   theta  = reg_theta mod pi/2

#pragma once

#include <cmath>
#include <stdexcept>

#include "rbox/geometry.hpp"

namespace rbox {

struct RawRegression {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;
};

struct DecodeParams {
  double k = 1.0;     // learnable adjustment factor, treated as configuration
  double stride = 1.0;

  void validate() const {
    if (!(k > 0.0) || !(stride > 0.0)) {
      throw std::invalid_argument("DecodeParams: k and stride must be positive");
    }
  }
};

inline double elu(double x) {
  return x > 0.0 ? x : std::expm1(x);
}

// elu(x) + 1 underflows to exactly 0 for x below about -37 in double
// precision; floor the factor so decoded extents stay strictly positive.
inline constexpr double kMinSizeFactor = 1e-12;

inline Obb decode_regression(const RawRegression& raw, Vec2 point, const DecodeParams& params) {
  params.validate();
  const double ks = params.k * params.stride;
  const double cx = point.x + raw.x * ks;
  const double cy = point.y + raw.y * ks;
  const double w = std::max(elu(raw.w * params.k) + 1.0, kMinSizeFactor) * params.stride;
  const double h = std::max(elu(raw.h * params.k) + 1.0, kMinSizeFactor) * params.stride;
  return Obb(cx, cy, w, h, raw.theta);
}

}  // namespace rbox
