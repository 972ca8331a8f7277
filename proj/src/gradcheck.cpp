#include "pba/gradcheck.hpp"

#include <cmath>
#include <random>

#include "pba/errors.hpp"
#include "pba/synthetic.hpp"

namespace pba {

GradcheckCase make_gradcheck_case(std::uint32_t seed, int size, int n_frames, int channels) {
  if (size < 8) throw InvalidInputError("gradcheck: size must be at least 8");
  std::mt19937 rng(seed);
  auto u = [&rng] { return rng() * (1.0 / 4294967296.0); };
  auto su = [&u] { return 2.0 * u() - 1.0; };  // uniform in (-1, 1)

  SceneSpec scene;
  scene.width = size;
  scene.height = size;
  scene.channels = channels;
  double f = static_cast<double>(size);
  scene.K = Intrinsics(f, f, (size - 1) / 2.0, (size - 1) / 2.0);
  SurfaceSpec s;
  s.point = Eigen::Vector3d(0.0, 0.0, 3.5 + u());
  s.normal = Eigen::Vector3d(0.3 * su(), 0.3 * su(), -1.0);
  s.frequency = 8.0 + 4.0 * u();
  s.contrast = 0.8;
  s.seed = rng();
  scene.surfaces.push_back(s);

  MotionSpec motion;
  motion.n_frames = n_frames;
  for (int k = 0; k + 1 < n_frames; ++k) {
    RigidPose step;
    step.rotation = Eigen::Vector3d(0.02 * su(), 0.02 * su(), 0.02 * su());
    step.translation = Eigen::Vector3d(0.08 * su(), 0.08 * su(), 0.08 * su());
    motion.steps.push_back(step);
  }

  RenderResult r = render_snippet(scene, motion);
  for (DepthMap& d : r.depths) {
    for (double& v : d.data) v *= std::exp(0.2 * su());
  }
  for (RigidPose& p : r.poses) {
    p.rotation += Eigen::Vector3d(0.01 * su(), 0.01 * su(), 0.01 * su());
    p.translation += Eigen::Vector3d(0.02 * su(), 0.02 * su(), 0.02 * su());
  }

  GradcheckCase out;
  out.snippet = std::move(r.snippet);
  out.params = pack_params(r.depths, r.poses, &out.layout);
  return out;
}

}  // namespace pba
