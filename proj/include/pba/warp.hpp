#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "pba/camera.hpp"
#include "pba/image.hpp"
#include "pba/pose.hpp"

namespace pba {

// Interpolation cell for continuous (u, v) on the closed domain
// [0, W-1] x [0, H-1]. Coordinates exactly on the right/bottom edge reuse the
// last interior cell with fractional offset 1, so the edge itself is valid.
struct BilinearCell {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double a = 0.0, b = 0.0;  // fractional offsets toward (x1, y1)
  bool valid = false;
};

BilinearCell bilinear_cell(double u, double v, int width, int height);

struct WarpedPixel {
  double u = 0.0, v = 0.0;  // continuous coordinates in the sampled frame
  double z = 0.0;           // depth after the rigid transform
  bool valid = false;       // source depth valid, finite, and z > kZMin
};

// Warped coordinates for every pixel of a source grid, row-major.
struct WarpField {
  int width = 0, height = 0;
  std::vector<WarpedPixel> pixels;
};

Eigen::Vector3d backproject(const PixelCoord& p, double depth, const Intrinsics& K);

// Single-pixel warp. An exactly-identity pose returns the input coordinates
// and depth unchanged, keeping static-scene residuals bitwise zero.
WarpedPixel project_warp_point(const PixelCoord& p, double depth, const Intrinsics& K,
                               const PoseMatrix& T);

// Throws InvalidInputError on non-positive depth; behind-camera results are
// flagged invalid instead of throwing.
WarpedPixel project_warp(const PixelCoord& p, double depth, const Intrinsics& K,
                         const RigidPose& T);

// Warp of every pixel; pixels with invalid source depth are flagged invalid.
WarpField warp_field(const DepthMap& depth, const Intrinsics& K, const PoseMatrix& T);

// (value, valid): valid means the whole interpolation cell lies in bounds.
// Invalid samples return value 0.
std::pair<double, bool> bilinear_sample(const ImageGrid& img, const PixelCoord& p,
                                        int channel = 0);

// Reconstructs the frame aligned with `depth` by warping each of its pixels
// into `target` and sampling bilinearly. Mask is false where the warp is
// invalid or the sample cell leaves the target bounds; masked pixels are 0.
std::pair<ImageGrid, ValidityMask> synthesize_view(const ImageGrid& target,
                                                   const DepthMap& depth,
                                                   const Intrinsics& K, const RigidPose& T);

// Per-pixel z after transforming backprojected points; invalid where the
// source is invalid or the transformed point sits at or behind kZMin.
DepthMap transform_depth(const DepthMap& depth, const Intrinsics& K, const RigidPose& T);

// Bilinear interpolation of a depth map at warped coordinates; invalid where
// the warp is invalid, the cell leaves bounds, or any corner depth is invalid.
DepthMap sample_depth(const DepthMap& depth, const WarpField& coords);

}  // namespace pba
