#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "pba/errors.hpp"
#include "pba/gradcheck.hpp"
#include "pba/objective.hpp"
#include "pba/pose.hpp"
#include "pba/snippet.hpp"

using namespace pba;

namespace {

ImageGrid textured(int w, int h, int ch) {
  ImageGrid img(w, h, ch);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c)
        img.at(x, y, c) = 0.5 + 0.3 * std::sin(0.7 * x + 1.3 * y + c) +
                          0.1 * std::cos(2.1 * x - 0.9 * y);
  return img;
}

Snippet static_snippet(int n_frames, int w, int h, int ch) {
  Snippet s;
  s.K = Intrinsics(static_cast<double>(w), static_cast<double>(w), (w - 1) / 2.0,
                   (h - 1) / 2.0);
  ImageGrid img = textured(w, h, ch);
  for (int f = 0; f < n_frames; ++f) s.frames.push_back(img);
  return s;
}

std::vector<DepthMap> constant_depths(int n_frames, int w, int h, double z) {
  std::vector<DepthMap> out;
  for (int f = 0; f < n_frames; ++f) {
    DepthMap d(w, h);
    for (double& v : d.data) v = z;
    out.push_back(d);
  }
  return out;
}

double recombine(const LossReport& rep, double dc_weight, double smooth_weight) {
  double total = 0.0;
  for (const ScaleReport& sr : rep.scales) {
    if (!sr.enabled) continue;
    double lt = sr.recon_fwd.sum + sr.recon_bwd.sum +
                dc_weight * (sr.dc_fwd.sum + sr.dc_bwd.sum) +
                smooth_weight * sr.smooth;
    total += sr.weight * lt;
  }
  return total;
}

}  // namespace

TEST_CASE("static snippet with constant depth has exactly zero total") {
  Snippet s = static_snippet(3, 16, 12, 3);
  std::vector<DepthMap> depths = constant_depths(3, 16, 12, 2.0);
  std::vector<RigidPose> poses(2, RigidPose::identity());
  LossReport rep = snippet_objective(s, poses, depths, LossWeights{});
  REQUIRE(rep.scales.size() == 4);
  for (const ScaleReport& sr : rep.scales) {
    CHECK(sr.enabled);
    CHECK(sr.recon_fwd.sum == 0.0);
    CHECK(sr.recon_bwd.sum == 0.0);
    CHECK(sr.dc_fwd.sum == 0.0);
    CHECK(sr.dc_bwd.sum == 0.0);
    CHECK(sr.smooth == 0.0);
    CHECK(sr.level_total == 0.0);
    CHECK(sr.recon_fwd.valid_count > 0);
    CHECK(sr.dc_fwd.valid_count > 0);
    CHECK_FALSE(sr.recon_fwd.empty);
  }
  CHECK(rep.total == 0.0);
}

TEST_CASE("static snippet with varying depth keeps photometric and dc at zero") {
  Snippet s = static_snippet(3, 16, 12, 3);
  std::vector<DepthMap> depths = constant_depths(3, 16, 12, 2.0);
  for (int f = 0; f < 3; ++f)
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 16; ++x) depths[f].at(x, y) = 2.0 + 0.1 * x + 0.05 * y;
  std::vector<RigidPose> poses(2, RigidPose::identity());
  LossReport rep = snippet_objective(s, poses, depths, LossWeights{});
  for (const ScaleReport& sr : rep.scales) {
    CHECK(sr.recon_fwd.sum == 0.0);
    CHECK(sr.recon_bwd.sum == 0.0);
    CHECK(sr.dc_fwd.sum == 0.0);
    CHECK(sr.dc_bwd.sum == 0.0);
    CHECK(sr.smooth > 0.0);
  }
  CHECK(rep.total > 0.0);
  CHECK(rep.total == recombine(rep, 1.0, 0.01));
}

TEST_CASE("scale weights are the exact powers of one half") {
  GradcheckCase gc = make_gradcheck_case(7u);
  LossReport rep = evaluate_objective(gc.snippet, gc.params, gc.layout, LossWeights{});
  REQUIRE(rep.scales.size() == 4);
  CHECK(rep.scales[0].weight == 1.0);
  CHECK(rep.scales[1].weight == 0.5);
  CHECK(rep.scales[2].weight == 0.25);
  CHECK(rep.scales[3].weight == 0.125);
  CHECK(rep.total == recombine(rep, 1.0, 0.01));
}

TEST_CASE("total is the weighted sum of independently evaluated scales") {
  GradcheckCase gc = make_gradcheck_case(11u);
  LossWeights w;
  LossReport full = evaluate_objective(gc.snippet, gc.params, gc.layout, w);
  double acc = 0.0;
  for (int l = 0; l < 4; ++l) {
    ObjectiveOptions opts;
    opts.scale_enabled = {false, false, false, false};
    opts.scale_enabled[l] = true;
    LossReport one = evaluate_objective(gc.snippet, gc.params, gc.layout, w, opts);
    for (int m = 0; m < 4; ++m) {
      if (m == l) {
        CHECK(one.scales[m].enabled);
        CHECK(one.scales[m].level_total == full.scales[l].level_total);
      } else {
        CHECK_FALSE(one.scales[m].enabled);
        CHECK(one.scales[m].weight == 0.0);
      }
    }
    acc += one.total;
  }
  CHECK(acc == full.total);
}

TEST_CASE("sequence reversal leaves the total unchanged") {
  for (std::uint32_t seed : {3u, 7u}) {
    GradcheckCase gc = make_gradcheck_case(seed);
    int n = gc.layout.n_frames;
    Snippet rev;
    rev.K = gc.snippet.K;
    for (int f = n - 1; f >= 0; --f) rev.frames.push_back(gc.snippet.frames[f]);
    std::vector<double> rp(gc.params.size());
    std::size_t plane = gc.layout.plane();
    for (int f = 0; f < n; ++f) {
      std::size_t src = gc.layout.disp_index(n - 1 - f, 0, 0);
      std::size_t dst = gc.layout.disp_index(f, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) rp[dst + i] = gc.params[src + i];
    }
    for (int pair = 0; pair < n - 1; ++pair) {
      std::size_t src = gc.layout.pose_offset(n - 2 - pair);
      RigidPose p;
      p.rotation = Eigen::Vector3d(gc.params[src], gc.params[src + 1], gc.params[src + 2]);
      p.translation =
          Eigen::Vector3d(gc.params[src + 3], gc.params[src + 4], gc.params[src + 5]);
      RigidPose q = invert_pose(p);
      std::size_t dst = gc.layout.pose_offset(pair);
      for (int i = 0; i < 3; ++i) {
        rp[dst + i] = q.rotation[i];
        rp[dst + 3 + i] = q.translation[i];
      }
    }
    LossWeights w;
    LossReport fwd = evaluate_objective(gc.snippet, gc.params, gc.layout, w);
    LossReport bwd = evaluate_objective(rev, rp, gc.layout, w);
    CHECK(std::fabs(fwd.total - bwd.total) <= 1e-10 * std::max(1.0, std::fabs(fwd.total)));
    for (int l = 0; l < 4; ++l) {
      CHECK(std::fabs(fwd.scales[l].recon_fwd.sum - bwd.scales[l].recon_bwd.sum) <= 1e-9);
      CHECK(std::fabs(fwd.scales[l].dc_fwd.sum - bwd.scales[l].dc_bwd.sum) <= 1e-9);
    }
  }
}

TEST_CASE("channel permutation leaves the total unchanged") {
  GradcheckCase gc = make_gradcheck_case(5u);
  Snippet perm;
  perm.K = gc.snippet.K;
  int w = gc.snippet.width(), h = gc.snippet.height(), ch = gc.snippet.channels();
  REQUIRE(ch == 3);
  for (const ImageGrid& img : gc.snippet.frames) {
    ImageGrid out(w, h, ch);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < ch; ++c) out.at(x, y, (c + 1) % ch) = img.at(x, y, c);
    perm.frames.push_back(out);
  }
  LossReport a = evaluate_objective(gc.snippet, gc.params, gc.layout, LossWeights{});
  LossReport b = evaluate_objective(perm, gc.params, gc.layout, LossWeights{});
  CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
}

TEST_CASE("two-frame snippet has one pair feeding both recon and dc") {
  GradcheckCase gc = make_gradcheck_case(4u, 16, 2);
  LossReport rep = evaluate_objective(gc.snippet, gc.params, gc.layout, LossWeights{});
  for (const ScaleReport& sr : rep.scales) {
    CHECK(sr.recon_fwd.valid_count > 0);
    CHECK(sr.dc_fwd.valid_count == sr.recon_fwd.valid_count);
    CHECK(sr.dc_bwd.valid_count == sr.recon_bwd.valid_count);
  }
}

TEST_CASE("all-invalid warps give empty terms, zero total, zero gradient") {
  Snippet s = static_snippet(2, 16, 12, 1);
  std::vector<DepthMap> depths = constant_depths(2, 16, 12, 1.0);
  std::vector<RigidPose> poses(1);
  poses[0].translation = Eigen::Vector3d(1000.0, 0.0, 0.0);
  ParamLayout layout;
  std::vector<double> params = pack_params(depths, poses, &layout);
  LossWeights w;
  w.smooth_weight = 0.0;
  LossReport rep = evaluate_objective(s, params, layout, w);
  for (const ScaleReport& sr : rep.scales) {
    CHECK(sr.recon_fwd.empty);
    CHECK(sr.recon_bwd.empty);
    CHECK(sr.dc_fwd.empty);
    CHECK(sr.dc_bwd.empty);
    CHECK(sr.recon_fwd.valid_count == 0);
    CHECK(sr.level_total == 0.0);
  }
  CHECK(rep.total == 0.0);
  auto [rep2, grad] = evaluate_objective_with_gradient(s, params, layout, w);
  CHECK(rep2.total == 0.0);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("objective is linear in the smoothness weight") {
  GradcheckCase gc = make_gradcheck_case(8u);
  LossWeights w0, w1, w2;
  w0.smooth_weight = 0.0;
  w1.smooth_weight = 0.01;
  w2.smooth_weight = 0.02;
  auto [r0, g0] = evaluate_objective_with_gradient(gc.snippet, gc.params, gc.layout, w0);
  auto [r1, g1] = evaluate_objective_with_gradient(gc.snippet, gc.params, gc.layout, w1);
  auto [r2, g2] = evaluate_objective_with_gradient(gc.snippet, gc.params, gc.layout, w2);
  double s = 0.0;
  for (const ScaleReport& sr : r1.scales) s += sr.weight * sr.smooth;
  CHECK(s > 0.0);
  CHECK(std::fabs((r2.total - r1.total) - 0.01 * s) <= 1e-9 * std::max(1.0, 0.01 * s));
  CHECK(std::fabs((r1.total - r0.total) - 0.01 * s) <= 1e-9 * std::max(1.0, 0.01 * s));
  for (std::size_t i = 0; i < g0.size(); ++i) {
    double d10 = g1[i] - g0[i], d21 = g2[i] - g1[i];
    CHECK(std::fabs(d21 - d10) <= 1e-10 * std::max(1.0, std::fabs(d10)));
  }
}

TEST_CASE("frozen evaluation matches the live objective at the capture point") {
  GradcheckCase gc = make_gradcheck_case(12u);
  LossWeights w;
  FrozenClip fc = freeze_clip(gc.snippet, gc.params, gc.layout, w);
  ObjectiveOptions opts;
  opts.frozen = &fc;
  LossReport live = evaluate_objective(gc.snippet, gc.params, gc.layout, w);
  LossReport froz = evaluate_objective(gc.snippet, gc.params, gc.layout, w, opts);
  CHECK(froz.total == doctest::Approx(live.total).epsilon(1e-12));
  CHECK_THROWS_AS(
      evaluate_objective_with_gradient(gc.snippet, gc.params, gc.layout, w, opts),
      InvalidInputError);
}

TEST_CASE("pack_params stores disparities then poses and validates depths") {
  std::vector<DepthMap> depths = constant_depths(2, 4, 3, 2.0);
  std::vector<RigidPose> poses(1);
  poses[0].rotation = Eigen::Vector3d(0.01, -0.02, 0.03);
  poses[0].translation = Eigen::Vector3d(0.1, 0.2, 0.3);
  ParamLayout layout;
  std::vector<double> params = pack_params(depths, poses, &layout);
  CHECK(layout.n_frames == 2);
  CHECK(layout.width == 4);
  CHECK(layout.height == 3);
  REQUIRE(params.size() == layout.size());
  for (std::size_t i = 0; i < layout.disp_count(); ++i) CHECK(params[i] == 0.5);
  std::size_t off = layout.pose_offset(0);
  CHECK(params[off + 1] == -0.02);
  CHECK(params[off + 3] == 0.1);
  CHECK(params[off + 5] == 0.3);

  depths[1].at(2, 1) = -1.0;
  CHECK_THROWS_AS(pack_params(depths, poses, &layout), InvalidInputError);
  depths[1].at(2, 1) = 2.0;
  depths[0].set_valid(0, 0, false);
  CHECK_THROWS_AS(pack_params(depths, poses, &layout), InvalidInputError);
}

TEST_CASE("objective validates its inputs") {
  GradcheckCase gc = make_gradcheck_case(2u);
  LossWeights w;
  ObjectiveOptions opts;
  opts.scales = 5;
  CHECK_THROWS_AS(evaluate_objective(gc.snippet, gc.params, gc.layout, w, opts),
                  InvalidInputError);
  opts.scales = 0;
  CHECK_THROWS_AS(evaluate_objective(gc.snippet, gc.params, gc.layout, w, opts),
                  InvalidInputError);

  std::vector<double> bad = gc.params;
  bad[0] = -0.5;
  CHECK_THROWS_AS(evaluate_objective(gc.snippet, bad, gc.layout, w), InvalidInputError);
  bad = gc.params;
  bad.pop_back();
  CHECK_THROWS_AS(evaluate_objective(gc.snippet, bad, gc.layout, w), InvalidInputError);

  ParamLayout wrong = gc.layout;
  wrong.width += 1;
  CHECK_THROWS_AS(evaluate_objective(gc.snippet, gc.params, wrong, w), InvalidInputError);
}
