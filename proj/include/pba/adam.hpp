#pragma once

#include <vector>

#include "pba/image.hpp"

namespace pba {

struct AdamState {
  std::vector<double> m, v;
  int step = 0;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(std::size_t n = 0, double lr_ = 1e-2)
      : m(n, 0.0), v(n, 0.0), lr(lr_) {}
};

// Bias-corrected Adam update in place. Throws NumericalError naming the
// coordinate on a non-finite gradient entry.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state);

// Divides every valid entry by the mean over valid entries (output mean 1).
// Throws InvalidInputError when no entry is valid or the mean is not positive.
DepthMap normalize_disparity(const DepthMap& d);

}  // namespace pba
