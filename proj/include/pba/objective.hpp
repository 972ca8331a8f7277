#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "pba/image.hpp"
#include "pba/losses.hpp"
#include "pba/pose.hpp"
#include "pba/snippet.hpp"

namespace pba {

inline constexpr int kMaxScales = 4;

// Per-pair piecewise structure at the capture point: warp validity, the
// bilinear cell of every warped sample, and the signs of the absolute-value
// residuals. Cells are stored by their top-left corner; -1 marks samples
// whose cell left the image bounds.
struct FrozenPairStructure {
  std::vector<std::uint8_t> wvalid;
  std::vector<std::int32_t> cell_x0, cell_y0;
  std::vector<std::int8_t> dc_sign;  // sign(transported - sampled) per pixel
  std::vector<std::int8_t> l1_sign;  // sign(synth - real) per pixel and channel
};

// The differentiability piece of the objective selected at one parameter
// point: clip thresholds with their active sets, plus every measure-zero
// choice (validity pattern, bilinear cells, absolute-value signs).
// Evaluating with a FrozenClip near that point yields a smooth function
// whose derivative there is exactly what the analytic gradient reports via
// the one-sided-from-below convention; central differences of it are free
// of kink noise. Index [scale][direction], direction 0 = forward. Active
// flags are in absolute pooled order: pair-major, then row-major pixels,
// one flag per pixel whether valid or not.
struct FrozenClip {
  std::array<std::array<double, 2>, kMaxScales> recon{};
  std::array<std::array<double, 2>, kMaxScales> dc{};
  std::array<std::array<std::vector<std::uint8_t>, 2>, kMaxScales> recon_active{};
  std::array<std::array<std::vector<std::uint8_t>, 2>, kMaxScales> dc_active{};
  std::array<std::array<std::vector<FrozenPairStructure>, 2>, kMaxScales> pairs{};
  // Smoothness edge signs per scale: frame-major, row-major, two entries per
  // pixel (x edge, then y edge).
  std::array<std::vector<std::int8_t>, kMaxScales> smooth_sign{};
};

struct ObjectiveOptions {
  int scales = 4;
  // Disabled scales contribute nothing; used for coarse-to-fine staging.
  std::array<bool, kMaxScales> scale_enabled{true, true, true, true};
  const FrozenClip* frozen = nullptr;
};

// Flat parameter vector layout: per-frame full-resolution disparity planes
// (frame-major, row-major) followed by 6 values per consecutive pose
// (axis-angle rotation, then translation).
struct ParamLayout {
  int n_frames = 0, width = 0, height = 0;

  std::size_t plane() const { return static_cast<std::size_t>(width) * height; }
  std::size_t disp_count() const { return static_cast<std::size_t>(n_frames) * plane(); }
  std::size_t size() const {
    return disp_count() + 6 * static_cast<std::size_t>(n_frames - 1);
  }
  std::size_t disp_index(int frame, int x, int y) const {
    return (static_cast<std::size_t>(frame) * height + y) * width + x;
  }
  std::size_t pose_offset(int pair) const {
    return disp_count() + 6 * static_cast<std::size_t>(pair);
  }
};

// Flattens depths (as disparities 1/depth) and poses. All depth entries must
// be valid, positive, and finite. Fills *layout.
std::vector<double> pack_params(const std::vector<DepthMap>& depths,
                                const std::vector<RigidPose>& poses, ParamLayout* layout);

// Full multi-scale objective. Disparities in params must be positive.
LossReport evaluate_objective(const Snippet& snippet, const std::vector<double>& params,
                              const ParamLayout& layout, const LossWeights& weights,
                              const ObjectiveOptions& opts = {});

// Objective plus its exact gradient in ParamLayout order. Rejects frozen
// options; frozen evaluation is value-only.
std::pair<LossReport, std::vector<double>> evaluate_objective_with_gradient(
    const Snippet& snippet, const std::vector<double>& params, const ParamLayout& layout,
    const LossWeights& weights, const ObjectiveOptions& opts = {});

// Captures the differentiability piece (thresholds, active sets, structure)
// at params. The result is only meaningful for evaluations near params.
FrozenClip freeze_clip(const Snippet& snippet, const std::vector<double>& params,
                       const ParamLayout& layout, const LossWeights& weights,
                       const ObjectiveOptions& opts = {});

// Structured-input entry point.
LossReport snippet_objective(const Snippet& snippet, const std::vector<RigidPose>& poses,
                             const std::vector<DepthMap>& depths, const LossWeights& weights,
                             int scales = 4);

}  // namespace pba
