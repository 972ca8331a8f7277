#pragma once

#include <cstdint>
#include <vector>

#include "pba/image.hpp"

namespace pba {

// The source paper overloads one symbol for the SSIM mixing factor, the clip
// threshold, and the consistency weight; they are separate fields here.
struct LossWeights {
  double ssim_mix = 0.85;
  double dc_weight = 1.0;
  double smooth_weight = 0.01;
  double clip_percentile = 95.0;

  void validate() const;
};

// Per-pixel nonnegative costs with validity flags.
struct CostField {
  int width = 0, height = 0;
  std::vector<double> cost;
  std::vector<std::uint8_t> valid;

  CostField() = default;
  CostField(int w, int h)
      : width(w), height(h),
        cost(static_cast<std::size_t>(w) * h, 0.0),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Channel-mean of ssim_mix*(1-SSIM)/2 + (1-ssim_mix)*|synth-real| per pixel,
// valid where mask is set. SSIM windows read all in-bounds pixels of both
// images regardless of the mask.
CostField photometric_cost(const ImageGrid& real, const ImageGrid& synth,
                           const ValidityMask& mask, double ssim_mix);

// |transported - sampled| where the mask and both depth maps are valid.
CostField depth_consistency_cost(const DepthMap& transported, const DepthMap& sampled,
                                 const ValidityMask& mask);

// Edge-aware first-order penalty: sum over forward-difference pairs of
// |d(x+1)-d(x)| * exp(-|gx|) + |d(y+1)-d(y)| * exp(-|gy|), where gx, gy are
// forward differences of the channel-mean image. Pairs with an invalid
// disparity endpoint are skipped. The disparity is used as given; callers
// wanting mean normalization apply it first.
double smoothness_cost(const DepthMap& disparity, const ImageGrid& image);

// Nearest-rank percentile: the ceil(q*n/100)-th smallest value. q in
// (0, 100]; q = 100 returns the maximum. Throws NumericalError on an empty
// set and InvalidInputError on a bad q.
double percentile(const std::vector<double>& values, double q);

// Valid entries of a cost field in row-major order.
std::vector<double> gather_valid_costs(const CostField& field);
double percentile(const CostField& field, double q);

// min(cost, threshold) per entry; validity unchanged. threshold must be
// nonnegative. The threshold is a constant with respect to differentiation:
// entries at or below it have derivative 1, entries above it 0.
CostField clip_costs(const CostField& costs, double threshold);

// One clipped cost term: sum of min(cost, threshold) over valid pixels.
struct TermStat {
  double sum = 0.0;
  double threshold = 0.0;
  std::size_t valid_count = 0;
  bool empty = true;  // no valid pixels anywhere; the term contributed 0
};

struct ScaleReport {
  TermStat recon_fwd, recon_bwd, dc_fwd, dc_bwd;
  double smooth = 0.0;       // unweighted edge-aware term at this scale
  double level_total = 0.0;  // recon + dc_weight*dc + smooth_weight*smooth
  double weight = 0.0;       // 1/2^(s-1), or 0 when the scale is disabled
  bool enabled = false;
};

struct LossReport {
  std::vector<ScaleReport> scales;
  double total = 0.0;
};

}  // namespace pba
