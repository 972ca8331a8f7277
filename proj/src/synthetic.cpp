#include "pba/synthetic.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "pba/errors.hpp"
#include "pba/threading.hpp"

namespace pba {
namespace {

constexpr int kWaves = 6;
constexpr double kTwoPi = 6.283185307179586476925286766559;

// 32-bit uniform in [0,1); mt19937 output is exactly specified, so draws are
// identical on every platform.
double urand(std::mt19937& rng) { return rng() * (1.0 / 4294967296.0); }

struct SurfaceWaves {
  std::array<Eigen::Vector3d, kWaves> k;
  std::vector<std::array<double, kWaves>> phase;  // [channel][wave]
};

SurfaceWaves make_waves(const SurfaceSpec& s, int channels) {
  std::mt19937 rng(s.seed);
  SurfaceWaves w;
  w.phase.resize(channels);
  for (int i = 0; i < kWaves; ++i) {
    double z = 2.0 * urand(rng) - 1.0;
    double az = kTwoPi * urand(rng);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double mag = s.frequency * (0.5 + urand(rng));
    w.k[i] = mag * Eigen::Vector3d(r * std::cos(az), r * std::sin(az), z);
    for (int c = 0; c < channels; ++c) w.phase[c][i] = kTwoPi * urand(rng);
  }
  return w;
}

double texture_value(const SurfaceSpec& s, const SurfaceWaves& w, const Eigen::Vector3d& X,
                     int c) {
  double acc = 0.0;
  for (int i = 0; i < kWaves; ++i) acc += std::sin(w.k[i].dot(X) + w.phase[c][i]);
  return s.base + 0.5 * s.contrast * (acc / kWaves);
}

constexpr double kNoHit = std::numeric_limits<double>::infinity();

double hit_plane(const SurfaceSpec& s, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  double denom = s.normal.dot(d);
  if (std::fabs(denom) < 1e-12) return kNoHit;
  double t = s.normal.dot(s.point - o) / denom;
  return t > kZMin ? t : kNoHit;
}

double hit_box(const SurfaceSpec& s, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  double tmin = -kNoHit, tmax = kNoHit;
  for (int a = 0; a < 3; ++a) {
    if (std::fabs(d[a]) < 1e-12) {
      if (o[a] < s.box_min[a] || o[a] > s.box_max[a]) return kNoHit;
      continue;
    }
    double t1 = (s.box_min[a] - o[a]) / d[a];
    double t2 = (s.box_max[a] - o[a]) / d[a];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
  }
  if (tmax < tmin) return kNoHit;
  if (tmin > kZMin) return tmin;
  return tmax > kZMin ? tmax : kNoHit;
}

}  // namespace

void SurfaceSpec::validate() const {
  if (!(frequency > 0.0) || !std::isfinite(frequency))
    throw InvalidInputError("surface: frequency must be positive");
  if (!(contrast >= 0.0) || !(contrast <= 1.0))
    throw InvalidInputError("surface: contrast must be in [0,1]");
  if (!(base - 0.5 * contrast >= 0.0) || !(base + 0.5 * contrast <= 1.0))
    throw InvalidInputError("surface: texture range must stay within [0,1]");
  if (kind == Kind::kPlane) {
    if (!(normal.norm() > 0.0)) throw InvalidInputError("surface: zero plane normal");
  } else {
    for (int a = 0; a < 3; ++a) {
      if (!(box_min[a] < box_max[a]))
        throw InvalidInputError("surface: box_min must be below box_max");
    }
  }
}

void SceneSpec::validate() const {
  if (width < 1 || height < 1) throw InvalidInputError("scene: empty image");
  if (channels != 1 && channels != 3)
    throw InvalidInputError("scene: channels must be 1 or 3");
  K.validate();
  if (surfaces.empty()) throw InvalidInputError("scene: no surfaces");
  for (const SurfaceSpec& s : surfaces) s.validate();
}

void MotionSpec::validate() const {
  if (n_frames < 2) throw InvalidInputError("motion: need at least 2 frames");
  if (steps.size() != static_cast<std::size_t>(n_frames - 1))
    throw InvalidInputError("motion: need one step per consecutive pair");
}

RenderResult render_snippet(const SceneSpec& scene, const MotionSpec& motion) {
  scene.validate();
  motion.validate();

  std::vector<PoseMatrix> cam_to_world(motion.n_frames);
  for (int k = 1; k < motion.n_frames; ++k) {
    cam_to_world[k] = compose(cam_to_world[k - 1], pose_matrix(motion.steps[k - 1]));
  }
  std::vector<SurfaceWaves> waves;
  waves.reserve(scene.surfaces.size());
  for (const SurfaceSpec& s : scene.surfaces) waves.push_back(make_waves(s, scene.channels));

  RenderResult out;
  out.snippet.K = scene.K;
  for (int k = 0; k < motion.n_frames; ++k) {
    ImageGrid img(scene.width, scene.height, scene.channels);
    DepthMap dm(scene.width, scene.height);
    const Eigen::Vector3d o = cam_to_world[k].t;
    const Eigen::Matrix3d& R = cam_to_world[k].R;
    parallel_row_tiles(scene.height, [&](int, int rb, int re) {
      for (int y = rb; y < re; ++y) {
        for (int x = 0; x < scene.width; ++x) {
          Eigen::Vector3d dir_cam((x - scene.K.cx) / scene.K.fx,
                                  (y - scene.K.cy) / scene.K.fy, 1.0);
          Eigen::Vector3d d = R * dir_cam;
          double best = kNoHit;
          int best_s = -1;
          for (std::size_t si = 0; si < scene.surfaces.size(); ++si) {
            const SurfaceSpec& s = scene.surfaces[si];
            double t = s.kind == SurfaceSpec::Kind::kPlane ? hit_plane(s, o, d)
                                                           : hit_box(s, o, d);
            if (t < best) {
              best = t;
              best_s = static_cast<int>(si);
            }
          }
          if (best_s < 0) {
            throw InvalidInputError("scene: no surface in front of camera at frame " +
                                    std::to_string(k) + ", pixel (" + std::to_string(x) +
                                    "," + std::to_string(y) + ")");
          }
          dm.at(x, y) = best;  // ray parameter equals camera-frame z
          Eigen::Vector3d X = o + best * d;
          for (int c = 0; c < scene.channels; ++c) {
            img.at(x, y, c) = texture_value(scene.surfaces[best_s], waves[best_s], X, c);
          }
        }
      }
    });
    out.snippet.frames.push_back(std::move(img));
    out.depths.push_back(std::move(dm));
  }
  out.poses.reserve(motion.n_frames - 1);
  for (const RigidPose& s : motion.steps) out.poses.push_back(invert_pose(s));
  return out;
}

CorruptedSnippet apply_corruption(const Snippet& snippet, const Corruption& c) {
  snippet.validate();
  const int N = snippet.size();
  const int W = snippet.width(), H = snippet.height(), CH = snippet.channels();
  CorruptedSnippet out{snippet, {}};
  out.corrupted.assign(N, ValidityMask(W, H, false));

  if (c.patch_w < 0 || c.patch_h < 0)
    throw InvalidInputError("corruption: negative patch size");
  bool has_patch = c.patch_w > 0 && c.patch_h > 0;
  if (has_patch) {
    if (!(c.texture_lo >= 0.0) || !(c.texture_lo <= c.texture_hi) || !(c.texture_hi <= 1.0))
      throw InvalidInputError("corruption: patch texture band must satisfy 0 <= lo <= hi <= 1");
    double area = static_cast<double>(c.patch_w) * c.patch_h;
    if (area > c.max_area_fraction * static_cast<double>(W) * H)
      throw InvalidInputError("corruption: patch exceeds declared area fraction");
    std::mt19937 rng(c.seed);
    std::vector<double> tex(static_cast<std::size_t>(c.patch_w) * c.patch_h * CH);
    for (double& v : tex) v = c.texture_lo + (c.texture_hi - c.texture_lo) * urand(rng);
    for (int t = 0; t < N; ++t) {
      long ox = c.patch_x + std::lround(t * c.dx);
      long oy = c.patch_y + std::lround(t * c.dy);
      if (ox < 0 || oy < 0 || ox + c.patch_w > W || oy + c.patch_h > H)
        throw InvalidInputError("corruption: patch leaves image bounds at frame " +
                                std::to_string(t));
      ImageGrid& img = out.snippet.frames[t];
      for (int py = 0; py < c.patch_h; ++py) {
        for (int px = 0; px < c.patch_w; ++px) {
          for (int ch = 0; ch < CH; ++ch) {
            img.at(static_cast<int>(ox) + px, static_cast<int>(oy) + py, ch) =
                tex[(static_cast<std::size_t>(py) * c.patch_w + px) * CH + ch];
          }
          out.corrupted[t].set(static_cast<int>(ox) + px, static_cast<int>(oy) + py, true);
        }
      }
    }
  }

  if (c.brightness.size() > static_cast<std::size_t>(N))
    throw InvalidInputError("corruption: more brightness offsets than frames");
  for (std::size_t t = 0; t < c.brightness.size(); ++t) {
    double b = c.brightness[t];
    if (b == 0.0) continue;
    ImageGrid& img = out.snippet.frames[t];
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        bool changed = false;
        for (int ch = 0; ch < CH; ++ch) {
          double v = img.at(x, y, ch);
          double nv = std::min(1.0, std::max(0.0, v + b));
          if (nv != v) {
            img.at(x, y, ch) = nv;
            changed = true;
          }
        }
        if (changed) out.corrupted[t].set(x, y, true);
      }
    }
  }
  return out;
}

}  // namespace pba
