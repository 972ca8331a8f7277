#include "pba/adam.hpp"

#include <cmath>
#include <string>

#include "pba/errors.hpp"
#include "pba/kernels/kernels.hpp"

namespace pba {

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    throw InvalidInputError("adam_step: layout mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i]))
      throw NumericalError("adam_step: non-finite gradient at coordinate " +
                           std::to_string(i));
  }
  state.step += 1;
  double t = static_cast<double>(state.step);
  double a = state.lr / (1.0 - std::pow(state.beta1, t));
  double b = 1.0 / std::sqrt(1.0 - std::pow(state.beta2, t));
  kernels::active().adam_update(params.data(), state.m.data(), state.v.data(), grads.data(),
                                params.size(), a, b, state.beta1, state.beta2,
                                state.epsilon);
}

DepthMap normalize_disparity(const DepthMap& d) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.pixel_count(); ++i) {
    if (d.valid[i]) {
      sum += d.data[i];
      ++n;
    }
  }
  if (n == 0) throw InvalidInputError("normalize_disparity: no valid entries");
  double mean = sum / static_cast<double>(n);
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw InvalidInputError("normalize_disparity: mean must be positive and finite");
  DepthMap out = d;
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    if (out.valid[i]) out.data[i] /= mean;
  }
  return out;
}

}  // namespace pba
