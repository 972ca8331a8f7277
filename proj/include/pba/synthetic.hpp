#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "pba/camera.hpp"
#include "pba/image.hpp"
#include "pba/pose.hpp"
#include "pba/snippet.hpp"

namespace pba {

// One textured surface. Textures are band-limited procedural noise (a small
// sum of sinusoids of the world position), so warped resampling stays
// well-conditioned; value range is [base - contrast/2, base + contrast/2].
struct SurfaceSpec {
  enum class Kind { kPlane, kBox };
  Kind kind = Kind::kPlane;
  Eigen::Vector3d point{0.0, 0.0, 4.0};    // plane anchor
  Eigen::Vector3d normal{0.0, 0.0, -1.0};  // plane normal, any nonzero length
  Eigen::Vector3d box_min{-1.0, -1.0, 3.0};
  Eigen::Vector3d box_max{1.0, 1.0, 5.0};
  double frequency = 1.0;  // spatial frequency scale of the texture waves
  double contrast = 0.8;
  double base = 0.5;
  std::uint32_t seed = 1;

  void validate() const;
};

struct SceneSpec {
  int width = 64, height = 64, channels = 1;
  Intrinsics K{64.0, 64.0, 31.5, 31.5};
  std::vector<SurfaceSpec> surfaces;

  void validate() const;
};

// Camera trajectory. steps[t] is the pose of camera t+1 expressed in camera
// t's frame, so the ground-truth warp transform from frame t into frame t+1
// is its inverse.
struct MotionSpec {
  int n_frames = 3;
  std::vector<RigidPose> steps;

  void validate() const;
};

struct RenderResult {
  Snippet snippet;
  std::vector<DepthMap> depths;  // exact per-pixel ray depth, one per frame
  std::vector<RigidPose> poses;  // warp transforms frame t -> t+1
};

// Ray-casts every frame; bitwise deterministic for a fixed spec. Throws
// InvalidInputError when some ray hits no surface in front of the camera.
RenderResult render_snippet(const SceneSpec& scene, const MotionSpec& motion);

// Rigidity violations: a patch with its own texture translating relative to
// the scene, and per-frame brightness offsets. The patch texture band
// defaults to values above typical scene texture so every pasted pixel is an
// actual change.
struct Corruption {
  int patch_x = 0, patch_y = 0;
  int patch_w = 0, patch_h = 0;  // zero size disables the patch
  double dx = 0.0, dy = 0.0;     // patch displacement per frame step, pixels
  std::vector<double> brightness;  // per-frame additive offset; missing = 0
  double max_area_fraction = 0.25;
  double texture_lo = 0.85, texture_hi = 0.95;
  std::uint32_t seed = 99;
};

struct CorruptedSnippet {
  Snippet snippet;
  std::vector<ValidityMask> corrupted;  // per frame, true where pixels changed
};

// Pastes the moving patch (marked in the masks unconditionally), then applies
// brightness offsets with re-clamping to [0,1] (marked where the value
// actually changed). Throws when the patch leaves the image bounds at any
// frame or exceeds max_area_fraction.
CorruptedSnippet apply_corruption(const Snippet& snippet, const Corruption& c);

}  // namespace pba
