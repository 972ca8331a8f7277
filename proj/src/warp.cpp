#include "pba/warp.hpp"

#include <cmath>

#include "pba/errors.hpp"

namespace pba {

BilinearCell bilinear_cell(double u, double v, int width, int height) {
  BilinearCell c;
  if (width < 1 || height < 1 || !std::isfinite(u) || !std::isfinite(v)) return c;
  if (u < 0.0 || u > width - 1 || v < 0.0 || v > height - 1) return c;
  c.x0 = static_cast<int>(std::floor(u));
  if (c.x0 > width - 2) c.x0 = width - 2;
  if (c.x0 < 0) c.x0 = 0;
  c.y0 = static_cast<int>(std::floor(v));
  if (c.y0 > height - 2) c.y0 = height - 2;
  if (c.y0 < 0) c.y0 = 0;
  c.x1 = c.x0 + 1 < width ? c.x0 + 1 : width - 1;
  c.y1 = c.y0 + 1 < height ? c.y0 + 1 : height - 1;
  c.a = u - c.x0;
  c.b = v - c.y0;
  c.valid = true;
  return c;
}

Eigen::Vector3d backproject(const PixelCoord& p, double depth, const Intrinsics& K) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw InvalidInputError("backproject: depth must be positive and finite");
  }
  return Eigen::Vector3d(depth * (p.u - K.cx) / K.fx, depth * (p.v - K.cy) / K.fy, depth);
}

WarpedPixel project_warp_point(const PixelCoord& p, double depth, const Intrinsics& K,
                               const PoseMatrix& T) {
  WarpedPixel w;
  if (!(depth > 0.0) || !std::isfinite(depth)) return w;
  if (T.is_identity()) {
    w.u = p.u;
    w.v = p.v;
    w.z = depth;
    w.valid = depth > kZMin;
    return w;
  }
  Eigen::Vector3d X(depth * (p.u - K.cx) / K.fx, depth * (p.v - K.cy) / K.fy, depth);
  Eigen::Vector3d Y = T.R * X + T.t;
  w.z = Y.z();
  if (!(Y.z() > kZMin)) return w;
  w.u = K.fx * Y.x() / Y.z() + K.cx;
  w.v = K.fy * Y.y() / Y.z() + K.cy;
  w.valid = std::isfinite(w.u) && std::isfinite(w.v);
  return w;
}

WarpedPixel project_warp(const PixelCoord& p, double depth, const Intrinsics& K,
                         const RigidPose& T) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw InvalidInputError("project_warp: depth must be positive and finite");
  }
  return project_warp_point(p, depth, K, pose_matrix(T));
}

WarpField warp_field(const DepthMap& depth, const Intrinsics& K, const PoseMatrix& T) {
  WarpField f;
  f.width = depth.width;
  f.height = depth.height;
  f.pixels.resize(static_cast<std::size_t>(depth.width) * depth.height);
  std::size_t i = 0;
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x, ++i) {
      if (!depth.valid[i]) continue;
      f.pixels[i] = project_warp_point(PixelCoord{double(x), double(y)}, depth.data[i], K, T);
    }
  }
  return f;
}

std::pair<double, bool> bilinear_sample(const ImageGrid& img, const PixelCoord& p,
                                        int channel) {
  BilinearCell c = bilinear_cell(p.u, p.v, img.width, img.height);
  if (!c.valid) return {0.0, false};
  double v00 = img.at(c.x0, c.y0, channel);
  double v10 = img.at(c.x1, c.y0, channel);
  double v01 = img.at(c.x0, c.y1, channel);
  double v11 = img.at(c.x1, c.y1, channel);
  double value = (1.0 - c.a) * (1.0 - c.b) * v00 + c.a * (1.0 - c.b) * v10 +
                 (1.0 - c.a) * c.b * v01 + c.a * c.b * v11;
  return {value, true};
}

std::pair<ImageGrid, ValidityMask> synthesize_view(const ImageGrid& target,
                                                   const DepthMap& depth,
                                                   const Intrinsics& K, const RigidPose& T) {
  if (target.width != depth.width || target.height != depth.height) {
    throw InvalidInputError("synthesize_view: depth dimensions must match the image");
  }
  ImageGrid out(target.width, target.height, target.channels);
  ValidityMask mask(target.width, target.height);
  WarpField f = warp_field(depth, K, pose_matrix(T));
  std::size_t i = 0;
  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x, ++i) {
      const WarpedPixel& w = f.pixels[i];
      if (!w.valid) continue;
      BilinearCell c = bilinear_cell(w.u, w.v, target.width, target.height);
      if (!c.valid) continue;
      mask.flags[i] = 1;
      for (int ch = 0; ch < target.channels; ++ch) {
        double v00 = target.at(c.x0, c.y0, ch);
        double v10 = target.at(c.x1, c.y0, ch);
        double v01 = target.at(c.x0, c.y1, ch);
        double v11 = target.at(c.x1, c.y1, ch);
        out.at(x, y, ch) = (1.0 - c.a) * (1.0 - c.b) * v00 + c.a * (1.0 - c.b) * v10 +
                           (1.0 - c.a) * c.b * v01 + c.a * c.b * v11;
      }
    }
  }
  return {std::move(out), std::move(mask)};
}

DepthMap transform_depth(const DepthMap& depth, const Intrinsics& K, const RigidPose& T) {
  DepthMap out(depth.width, depth.height, 0.0, false);
  PoseMatrix M = pose_matrix(T);
  WarpField f = warp_field(depth, K, M);
  for (std::size_t i = 0; i < f.pixels.size(); ++i) {
    if (!depth.valid[i]) continue;
    out.data[i] = f.pixels[i].z;
    out.valid[i] = f.pixels[i].valid ? 1 : 0;
  }
  return out;
}

DepthMap sample_depth(const DepthMap& depth, const WarpField& coords) {
  DepthMap out(coords.width, coords.height, 0.0, false);
  for (std::size_t i = 0; i < coords.pixels.size(); ++i) {
    const WarpedPixel& w = coords.pixels[i];
    if (!w.valid) continue;
    BilinearCell c = bilinear_cell(w.u, w.v, depth.width, depth.height);
    if (!c.valid) continue;
    if (!depth.valid_at(c.x0, c.y0) || !depth.valid_at(c.x1, c.y0) ||
        !depth.valid_at(c.x0, c.y1) || !depth.valid_at(c.x1, c.y1)) {
      continue;
    }
    out.data[i] = (1.0 - c.a) * (1.0 - c.b) * depth.at(c.x0, c.y0) +
                  c.a * (1.0 - c.b) * depth.at(c.x1, c.y0) +
                  (1.0 - c.a) * c.b * depth.at(c.x0, c.y1) +
                  c.a * c.b * depth.at(c.x1, c.y1);
    out.valid[i] = 1;
  }
  return out;
}

}  // namespace pba
