#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pba/losses.hpp"
#include "pba/objective.hpp"
#include "pba/snippet.hpp"

namespace pba {

struct OptimizeConfig {
  int iterations = 2000;
  double lr = 1e-2;
  double lr_drop_factor = 0.1;
  double lr_drop_point = 0.75;  // fraction of iterations after which lr drops
  double tolerance = 0.0;       // relative decrease threshold; 0 disables early stop
  int stage_iterations = 250;   // length of each coarse-to-fine warm stage
  int scales = 4;
  double d_min = 0.01;
  double d_max = 10.0;
  std::uint32_t seed = 0;

  void validate() const;
};

struct SolveResult {
  std::vector<DepthMap> depths;   // one per frame
  std::vector<RigidPose> poses;   // consecutive-pair transforms, frame t -> t+1
  LossReport final_report;        // full objective at the returned parameters
  std::vector<double> trace;      // objective per iteration; trace[0] is the init value
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;        // near-zero gradient at initialization
  std::string warning;
};

// Joint minimization over per-frame disparities and consecutive poses.
// Disparities live as unconstrained logits mapped through a logistic into
// [d_min, d_max], starting mid-range; poses start at identity. Warm stages
// optimize progressively finer scale subsets (coarsest only, then coarsest
// two, ...), the remaining budget runs all scales. The returned parameters
// are the best full-objective iterate seen, so the final objective never
// exceeds the initial one.
SolveResult solve_snippet(const Snippet& snippet, const OptimizeConfig& config,
                          const LossWeights& weights);

}  // namespace pba
