#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pba/objective.hpp"

namespace pba {

// Central differences (f(x+h)-f(x-h))/2h of the objective per coordinate.
// The differentiability piece (clip thresholds and active sets, warp
// validity, bilinear cells, absolute-value signs) is frozen at the base
// point first, so the differentiated function is the smooth piece whose
// one-sided-from-below derivative the analytic gradient reports; the
// stencil never straddles a measure-zero kink.
std::vector<double> finite_difference_gradient(const Snippet& snippet,
                                               const std::vector<double>& params,
                                               const ParamLayout& layout,
                                               const LossWeights& weights,
                                               const ObjectiveOptions& opts, double step);

// Same, restricted to the given coordinate indices (result aligned with them).
std::vector<double> finite_difference_gradient_at(const Snippet& snippet,
                                                  const std::vector<double>& params,
                                                  const ParamLayout& layout,
                                                  const LossWeights& weights,
                                                  const ObjectiveOptions& opts,
                                                  const std::vector<std::size_t>& indices,
                                                  double step);

struct GradientCheckReport {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;     // ParamLayout coordinate of the worst error
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::uint32_t seed = 0;
};

// Compares the analytic gradient against the finite-difference oracle on all
// pose coordinates plus a seeded random subset of disparity coordinates,
// max_coords in total. Relative error |a-n| / max(|a|, |n|, 1).
GradientCheckReport gradient_check(const Snippet& snippet, const std::vector<double>& params,
                                   const ParamLayout& layout, const LossWeights& weights,
                                   const ObjectiveOptions& opts = {}, double step = 1e-6,
                                   std::size_t max_coords = 512, std::uint32_t seed = 7u);

}  // namespace pba
