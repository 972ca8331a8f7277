#pragma once

#include "pba/image.hpp"

namespace pba {

// Bilinear enlargement by an integer factor >= 2 under the half-pixel
// mapping u_low = (u_high + 0.5)/factor - 0.5 (clamped to the low-res
// domain). Output pixels are valid when all cell corners are valid; constant
// inputs are preserved exactly.
DepthMap bilinear_upsample_depth(const DepthMap& low, int factor = 2);

struct GuidedUpsampleResult {
  DepthMap depth;
  ValidityMask fallback;  // pixels where degenerate weights forced bilinear
};

// Joint-bilateral upsampling: each high-res depth is a weighted average of
// valid low-res neighbors within a 5x5 low-res window, weight = spatial
// Gaussian (distance in high-res pixels between the output pixel and the
// neighbor's high-res center) times a range Gaussian on the guide-intensity
// difference sampled at those two positions. Non-positive sigmas select the
// defaults: spatial_sigma = factor, range_sigma = 0.1. Pixels with no valid
// neighbor or fully underflowed weights fall back to bilinear and are
// flagged. Output values stay inside the hull of contributing depths.
GuidedUpsampleResult guided_upsample_depth(const DepthMap& low, const ImageGrid& guide,
                                           int factor = 2, double range_sigma = 0.1,
                                           double spatial_sigma = 0.0);

}  // namespace pba
