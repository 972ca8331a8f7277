#pragma once

#include <cstddef>

#include "pba/image.hpp"

namespace pba {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0;
  std::size_t n_pixels = 0;  // pixels entering the means
};

// Standard depth metrics over pixels where both maps are valid and gt <= cap.
// Predictions are clamped to [1e-3, cap] first. deltaK is the fraction with
// max(p/g, g/p) <= 1.25^K. Throws when no pixel qualifies.
DepthMetrics compute_metrics(const DepthMap& pred, const DepthMap& gt, double cap = 80.0);

// pred scaled by median(gt)/median(pred) over jointly valid pixels, using the
// nearest-rank lower median. Throws on empty overlap or a non-positive median.
DepthMap median_scale(const DepthMap& pred, const DepthMap& gt);

// RMSE restricted to pixels within 1 px (Chebyshev) of a gt depth
// discontinuity, where a discontinuity marks both endpoints of a forward
// difference with |gt(p+1) - gt(p)| > edge_threshold. Throws when the gt has
// no such boundary pixels.
double boundary_error(const DepthMap& pred, const DepthMap& gt, double edge_threshold);

}  // namespace pba
