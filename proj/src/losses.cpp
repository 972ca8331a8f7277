#include "pba/losses.hpp"

#include <algorithm>
#include <cmath>

#include "pba/errors.hpp"
#include "pba/kernels/kernels.hpp"
#include "pba/ssim.hpp"

namespace pba {

void LossWeights::validate() const {
  if (!(ssim_mix >= 0.0 && ssim_mix <= 1.0))
    throw InvalidInputError("weights: ssim_mix must be in [0,1]");
  if (!(dc_weight >= 0.0)) throw InvalidInputError("weights: dc_weight must be >= 0");
  if (!(smooth_weight >= 0.0)) throw InvalidInputError("weights: smooth_weight must be >= 0");
  if (!(clip_percentile > 0.0 && clip_percentile <= 100.0))
    throw InvalidInputError("weights: clip_percentile must be in (0,100]");
}

CostField photometric_cost(const ImageGrid& real, const ImageGrid& synth,
                           const ValidityMask& mask, double ssim_mix) {
  if (!real.same_dims(synth))
    throw InvalidInputError("photometric_cost: image dimensions must match");
  if (mask.width != real.width || mask.height != real.height)
    throw InvalidInputError("photometric_cost: mask dimensions must match");
  SsimStats stats = ssim_stats(synth, real);
  CostField out(real.width, real.height);
  std::size_t plane = out.pixel_count();
  int CH = real.channels;
  for (std::size_t p = 0; p < plane; ++p) {
    if (!mask.flags[p]) continue;
    double acc = 0.0;
    for (int c = 0; c < CH; ++c) {
      std::size_t i = c * plane + p;
      double s = ssim_value(stats.mu_x[i], stats.mu_y[i], stats.var_x[i], stats.var_y[i],
                            stats.cov[i]);
      double l1 = std::fabs(synth.data[p * CH + c] - real.data[p * CH + c]);
      acc += ssim_mix * (1.0 - s) * 0.5 + (1.0 - ssim_mix) * l1;
    }
    out.cost[p] = acc / CH;
    out.valid[p] = 1;
  }
  return out;
}

CostField depth_consistency_cost(const DepthMap& transported, const DepthMap& sampled,
                                 const ValidityMask& mask) {
  if (transported.width != sampled.width || transported.height != sampled.height)
    throw InvalidInputError("depth_consistency_cost: dimensions must match");
  if (mask.width != transported.width || mask.height != transported.height)
    throw InvalidInputError("depth_consistency_cost: mask dimensions must match");
  CostField out(transported.width, transported.height);
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    if (!mask.flags[p] || !transported.valid[p] || !sampled.valid[p]) continue;
    out.cost[p] = std::fabs(transported.data[p] - sampled.data[p]);
    out.valid[p] = 1;
  }
  return out;
}

double smoothness_cost(const DepthMap& disparity, const ImageGrid& image) {
  if (disparity.width != image.width || disparity.height != image.height)
    throw InvalidInputError("smoothness_cost: dimensions must match");
  int W = image.width, H = image.height, CH = image.channels;
  auto mean_intensity = [&](int x, int y) {
    double s = 0.0;
    for (int c = 0; c < CH; ++c) s += image.at(x, y, c);
    return s / CH;
  };
  double total = 0.0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      if (!disparity.valid_at(x, y)) continue;
      if (x + 1 < W && disparity.valid_at(x + 1, y)) {
        double gx = mean_intensity(x + 1, y) - mean_intensity(x, y);
        total += std::fabs(disparity.at(x + 1, y) - disparity.at(x, y)) *
                 std::exp(-std::fabs(gx));
      }
      if (y + 1 < H && disparity.valid_at(x, y + 1)) {
        double gy = mean_intensity(x, y + 1) - mean_intensity(x, y);
        total += std::fabs(disparity.at(x, y + 1) - disparity.at(x, y)) *
                 std::exp(-std::fabs(gy));
      }
    }
  }
  return total;
}

double percentile(const std::vector<double>& values, double q) {
  if (!(q > 0.0 && q <= 100.0))
    throw InvalidInputError("percentile: q must be in (0,100]");
  if (values.empty()) throw NumericalError("percentile: empty cost set");
  std::size_t n = values.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) / 100.0));
  if (k < 1) k = 1;
  if (k > n) k = n;
  std::vector<double> scratch(values);
  std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
  return scratch[k - 1];
}

std::vector<double> gather_valid_costs(const CostField& field) {
  std::vector<double> out;
  out.reserve(field.pixel_count());
  for (std::size_t p = 0; p < field.pixel_count(); ++p) {
    if (field.valid[p]) out.push_back(field.cost[p]);
  }
  return out;
}

double percentile(const CostField& field, double q) {
  return percentile(gather_valid_costs(field), q);
}

CostField clip_costs(const CostField& costs, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidInputError("clip_costs: threshold must be >= 0");
  CostField out(costs.width, costs.height);
  out.valid = costs.valid;
  kernels::active().clip_upper(costs.cost.data(), threshold, out.cost.data(),
                               costs.cost.size());
  return out;
}

}  // namespace pba
