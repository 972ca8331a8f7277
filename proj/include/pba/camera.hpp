#pragma once

#include <cmath>

#include "pba/errors.hpp"

namespace pba {

// Points with camera-frame z at or below this are treated as behind the
// camera and flagged invalid instead of producing huge projections.
inline constexpr double kZMin = 1e-3;

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  Intrinsics() = default;
  Intrinsics(double fx_, double fy_, double cx_, double cy_)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
    validate();
  }

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
      throw InvalidInputError("intrinsics: focal lengths must be positive and finite");
    if (!std::isfinite(cx) || !std::isfinite(cy))
      throw InvalidInputError("intrinsics: principal point must be finite");
  }
};

// Intrinsics of the 2x2 average-pooled pyramid level `level` (1-based,
// level 1 = full resolution). Pixel centers follow the half-pixel mapping
// u_low = (u + 0.5) / 2^(level-1) - 0.5.
inline Intrinsics intrinsics_for_level(const Intrinsics& k, int level) {
  double s = static_cast<double>(1 << (level - 1));
  return Intrinsics(k.fx / s, k.fy / s, (k.cx + 0.5) / s - 0.5, (k.cy + 0.5) / s - 0.5);
}

}  // namespace pba
