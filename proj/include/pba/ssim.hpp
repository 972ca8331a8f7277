#pragma once

#include <vector>

#include "pba/image.hpp"

namespace pba {

// Constants for [0,1] intensities.
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Per-pixel, per-channel statistics over a 3x3 box window intersected with
// the image bounds. Planar layout: channel c occupies [c*W*H, (c+1)*W*H).
struct SsimStats {
  int width = 0, height = 0, channels = 1;
  std::vector<double> mu_x, mu_y, var_x, var_y, cov;

  std::size_t plane() const { return static_cast<std::size_t>(width) * height; }
};

SsimStats ssim_stats(const ImageGrid& x, const ImageGrid& y);

// Number of in-bounds taps of the 3x3 window centered at (px, py).
inline int ssim_window_count(int px, int py, int width, int height) {
  int wx = (px > 0 ? 1 : 0) + 1 + (px < width - 1 ? 1 : 0);
  int wy = (py > 0 ? 1 : 0) + 1 + (py < height - 1 ? 1 : 0);
  return wx * wy;
}

// SSIM from window statistics. The grouping below makes ssim of identical
// windows exactly 1: both factors reduce to q/q for the same q.
inline double ssim_value(double mu_x, double mu_y, double var_x, double var_y, double cov) {
  double a = 2.0 * mu_x * mu_y + kSsimC1;
  double b = 2.0 * cov + kSsimC2;
  double c = mu_x * mu_x + mu_y * mu_y + kSsimC1;
  double d = var_x + var_y + kSsimC2;
  return (a * b) / (c * d);
}

// Channel-mean SSIM map, row-major. Values lie in [-1, 1]; ssim_map(x, x)
// is exactly 1 everywhere. Throws InvalidInputError on dimension mismatch.
std::vector<double> ssim_map(const ImageGrid& x, const ImageGrid& y);

}  // namespace pba
