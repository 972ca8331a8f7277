#pragma once

#include <cstdint>

#include "pba/objective.hpp"
#include "pba/snippet.hpp"

namespace pba {

// A seeded random textured snippet with perturbed ground-truth parameters:
// a generic, non-degenerate point for derivative verification.
struct GradcheckCase {
  Snippet snippet;
  ParamLayout layout;
  std::vector<double> params;
};

GradcheckCase make_gradcheck_case(std::uint32_t seed, int size = 16, int n_frames = 3,
                                  int channels = 3);

}  // namespace pba
