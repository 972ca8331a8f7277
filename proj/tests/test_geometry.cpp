#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pba/camera.hpp"
#include "pba/errors.hpp"
#include "pba/pose.hpp"
#include "pba/warp.hpp"

using namespace pba;

namespace {

Eigen::Vector3d random_unit(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::Vector3d v(d(rng), d(rng), d(rng));
  while (v.norm() < 1e-3) v = Eigen::Vector3d(d(rng), d(rng), d(rng));
  return v.normalized();
}

RigidPose random_pose(std::mt19937& rng, double angle_scale = 1.5, double t_scale = 1.0) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  RigidPose p;
  p.rotation = random_unit(rng) * std::abs(d(rng)) * angle_scale;
  p.translation = Eigen::Vector3d(d(rng), d(rng), d(rng)) * t_scale;
  return p;
}

}  // namespace

TEST_CASE("backproject hand cases") {
  Intrinsics k1(100.0, 100.0, 32.0, 24.0);
  Eigen::Vector3d x = backproject({32.0, 24.0}, 5.0, k1);
  CHECK(x.isApprox(Eigen::Vector3d(0, 0, 5), 1e-15));

  Intrinsics k2(1.0, 1.0, 0.0, 0.0);
  CHECK(backproject({2.0, 3.0}, 1.0, k2).isApprox(Eigen::Vector3d(2, 3, 1), 1e-15));

  Intrinsics k3(2.0, 4.0, 1.0, 1.0);
  CHECK(backproject({3.0, 5.0}, 2.0, k3).isApprox(Eigen::Vector3d(2, 2, 2), 1e-15));

  CHECK_THROWS_AS(backproject({0, 0}, 0.0, k1), InvalidInputError);
  CHECK_THROWS_AS(backproject({0, 0}, -1.0, k1), InvalidInputError);
}

TEST_CASE("backproject then project returns the pixel") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(0.1, 60.0);
  Intrinsics k(80.0, 75.0, 31.5, 23.5);
  for (int i = 0; i < 100; ++i) {
    PixelCoord p{d(rng), d(rng)};
    double depth = d(rng);
    Eigen::Vector3d x = backproject(p, depth, k);
    double u = k.fx * x.x() / x.z() + k.cx;
    double v = k.fy * x.y() / x.z() + k.cy;
    CHECK(std::abs(u - p.u) < 1e-10);
    CHECK(std::abs(v - p.v) < 1e-10);
  }
}

TEST_CASE("transform_point hand cases") {
  RigidPose id;
  CHECK(transform_point({1, 2, 3}, id).isApprox(Eigen::Vector3d(1, 2, 3), 1e-15));

  RigidPose tz;
  tz.translation = Eigen::Vector3d(0, 0, 1);
  CHECK(transform_point({0, 0, 1}, tz).isApprox(Eigen::Vector3d(0, 0, 2), 1e-15));

  RigidPose rz;
  rz.rotation = Eigen::Vector3d(0, 0, M_PI / 2);
  CHECK((transform_point({1, 0, 0}, rz) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("axis-angle round trips and rotation matrix structure") {
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    RigidPose p = random_pose(rng, 3.0);
    Eigen::Matrix3d r = axis_angle_to_matrix(p.rotation);
    CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
    Eigen::Vector3d w = matrix_to_axis_angle(r);
    CHECK(w.norm() <= M_PI + 1e-12);
    CHECK((axis_angle_to_matrix(w) - r).norm() < 1e-10);
  }
}

TEST_CASE("compose with inverse is the identity") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    PoseMatrix m = pose_matrix(random_pose(rng));
    PoseMatrix prod = compose(m, inverse(m));
    CHECK((prod.R - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(prod.t.norm() < 1e-12);

    RigidPose p = random_pose(rng);
    Eigen::Vector3d x(d(rng), d(rng), d(rng));
    Eigen::Vector3d back = transform_point(transform_point(x, p), invert_pose(p));
    CHECK((back - x).norm() < 1e-10);
  }
}

TEST_CASE("axis_angle_jacobian matches finite differences") {
  std::mt19937 rng(13);
  for (int i = 0; i < 40; ++i) {
    RigidPose p = random_pose(rng, 2.5);
    Eigen::Vector3d w = p.rotation;
    std::array<Eigen::Matrix3d, 3> jac = axis_angle_jacobian(w);
    double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      Eigen::Matrix3d fd = (axis_angle_to_matrix(wp) - axis_angle_to_matrix(wm)) / (2.0 * h);
      CHECK((fd - jac[k]).norm() < 1e-7);
    }
  }
}

TEST_CASE("axis_angle_jacobian at zero rotation") {
  std::array<Eigen::Matrix3d, 3> jac = axis_angle_jacobian(Eigen::Vector3d::Zero());
  Eigen::Matrix3d gx;
  gx << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((jac[0] - gx).norm() < 1e-12);
}

TEST_CASE("project_warp hand cases") {
  Intrinsics k(1.0, 1.0, 0.0, 0.0);
  RigidPose id;
  WarpedPixel w = project_warp({0.3, -0.7}, 2.0, k, id);
  CHECK(w.valid);
  CHECK(std::abs(w.u - 0.3) < 1e-10);
  CHECK(std::abs(w.v + 0.7) < 1e-10);
  CHECK(w.z == 2.0);

  RigidPose tx;
  tx.translation = Eigen::Vector3d(1, 0, 0);
  w = project_warp({0.0, 0.0}, 1.0, k, tx);
  CHECK(w.valid);
  CHECK(std::abs(w.u - 1.0) < 1e-12);
  CHECK(std::abs(w.v) < 1e-12);

  RigidPose behind;
  behind.translation = Eigen::Vector3d(0, 0, -2);
  w = project_warp({0.0, 0.0}, 1.0, k, behind);
  CHECK_FALSE(w.valid);

  CHECK_THROWS_AS(project_warp({0.0, 0.0}, -1.0, k, id), InvalidInputError);
}

TEST_CASE("bilinear_cell treats the right and bottom edges as valid") {
  BilinearCell c = bilinear_cell(3.0, 2.0, 4, 3);
  CHECK(c.valid);
  CHECK(c.x0 == 2);
  CHECK(c.a == 1.0);
  CHECK(c.y0 == 1);
  CHECK(c.b == 1.0);
  CHECK_FALSE(bilinear_cell(3.0001, 2.0, 4, 3).valid);
  CHECK_FALSE(bilinear_cell(-0.0001, 0.0, 4, 3).valid);
}

TEST_CASE("bilinear_sample hand cases") {
  ImageGrid img(2, 2, 1);
  img.at(0, 0) = 0.0;
  img.at(1, 0) = 1.0;
  img.at(0, 1) = 2.0;
  img.at(1, 1) = 3.0;
  auto [v, ok] = bilinear_sample(img, {0.5, 0.5});
  CHECK(ok);
  CHECK(v == 1.5);

  auto [v2, ok2] = bilinear_sample(img, {1.0, 0.0});
  CHECK(ok2);
  CHECK(v2 == 1.0);

  auto [v3, ok3] = bilinear_sample(img, {-0.1, 0.0});
  CHECK_FALSE(ok3);
  CHECK(v3 == 0.0);
}

TEST_CASE("bilinear_sample matches a brute-force weighted sum") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  ImageGrid img(9, 7, 1);
  for (double& x : img.data) x = val(rng);
  std::uniform_real_distribution<double> cu(-1.0, 9.0), cv(-1.0, 7.0);
  for (int i = 0; i < 1000; ++i) {
    double u = cu(rng), v = cv(rng);
    auto [got, ok] = bilinear_sample(img, {u, v});
    bool inside = u >= 0.0 && u <= 8.0 && v >= 0.0 && v <= 6.0;
    CHECK(ok == inside);
    if (!inside) continue;
    int x0 = std::min(static_cast<int>(std::floor(u)), 7);
    int y0 = std::min(static_cast<int>(std::floor(v)), 5);
    double a = u - x0, b = v - y0;
    double w00 = (1 - a) * (1 - b), w10 = a * (1 - b), w01 = (1 - a) * b, w11 = a * b;
    double expect = w00 * img.at(x0, y0) + w10 * img.at(x0 + 1, y0) +
                    w01 * img.at(x0, y0 + 1) + w11 * img.at(x0 + 1, y0 + 1);
    CHECK(std::abs(w00 + w10 + w01 + w11 - 1.0) < 1e-15);
    CHECK(std::abs(got - expect) < 1e-14);
    double lo = std::min({img.at(x0, y0), img.at(x0 + 1, y0), img.at(x0, y0 + 1),
                          img.at(x0 + 1, y0 + 1)});
    double hi = std::max({img.at(x0, y0), img.at(x0 + 1, y0), img.at(x0, y0 + 1),
                          img.at(x0 + 1, y0 + 1)});
    CHECK(got >= lo - 1e-15);
    CHECK(got <= hi + 1e-15);
  }
}

TEST_CASE("synthesize_view with identity pose copies the target") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  ImageGrid target(8, 6, 3);
  for (double& x : target.data) x = val(rng);
  DepthMap depth(8, 6, 2.5);
  Intrinsics k(8.0, 8.0, 3.5, 2.5);
  auto [synth, mask] = synthesize_view(target, depth, k, RigidPose{});
  CHECK(mask.count() == 48);
  CHECK(synth.data == target.data);
}

TEST_CASE("synthesize_view shifts by one pixel under a unit-disparity x-translation") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  ImageGrid target(8, 8, 1);
  for (double& x : target.data) x = val(rng);
  double z = 2.0;
  Intrinsics k(4.0, 4.0, 3.5, 3.5);
  DepthMap depth(8, 8, z);
  RigidPose t;
  t.translation = Eigen::Vector3d(z / k.fx, 0.0, 0.0);  // fx*b/z = 1 pixel
  auto [synth, mask] = synthesize_view(target, depth, k, t);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      if (x + 1 < 8) {
        CHECK(mask.at(x, y));
        CHECK(synth.at(x, y) == target.at(x + 1, y));
      } else {
        CHECK_FALSE(mask.at(x, y));
      }
    }
  }
}

TEST_CASE("synthesize_view with all-invalid depths masks everything") {
  ImageGrid target(4, 4, 1, 0.5);
  DepthMap depth(4, 4, 1.0, false);
  Intrinsics k(4.0, 4.0, 1.5, 1.5);
  auto [synth, mask] = synthesize_view(target, depth, k, RigidPose{});
  CHECK(mask.count() == 0);
  for (double v : synth.data) CHECK(v == 0.0);
}

TEST_CASE("transform_depth hand cases") {
  DepthMap d(3, 3, 4.0);
  d.set_valid(1, 1, false);
  Intrinsics k(3.0, 3.0, 1.0, 1.0);

  DepthMap same = transform_depth(d, k, RigidPose{});
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) {
      CHECK(same.valid_at(x, y) == d.valid_at(x, y));
      if (same.valid_at(x, y)) CHECK(same.at(x, y) == 4.0);
    }
  }

  RigidPose tz;
  tz.translation = Eigen::Vector3d(0, 0, 0.75);
  DepthMap shifted = transform_depth(d, k, tz);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 3; ++x) {
      if (shifted.valid_at(x, y)) CHECK(shifted.at(x, y) == 4.0 + 0.75);
    }
  }

  RigidPose flip;
  flip.rotation = Eigen::Vector3d(0, M_PI, 0);
  DepthMap behind = transform_depth(DepthMap(1, 1, 1.0), Intrinsics(1, 1, 0, 0), flip);
  CHECK_FALSE(behind.valid_at(0, 0));
}

TEST_CASE("sample_depth hand cases") {
  DepthMap d(2, 2);
  d.at(0, 0) = 1.0;
  d.at(1, 0) = 1.0;
  d.at(0, 1) = 3.0;
  d.at(1, 1) = 3.0;
  WarpField wf;
  wf.width = 2;
  wf.height = 2;
  wf.pixels.resize(4);
  wf.pixels[0] = {0.0, 0.5, 1.0, true};
  wf.pixels[1] = {1.0, 0.0, 1.0, true};
  wf.pixels[2] = {2.5, 0.0, 1.0, true};
  wf.pixels[3] = {0.0, 0.0, 1.0, false};
  DepthMap s = sample_depth(d, wf);
  CHECK(s.valid_at(0, 0));
  CHECK(s.at(0, 0) == 2.0);
  CHECK(s.valid_at(1, 0));
  CHECK(s.at(1, 0) == 1.0);
  CHECK_FALSE(s.valid_at(0, 1));  // out of bounds
  CHECK_FALSE(s.valid_at(1, 1));  // invalid warp

  d.set_valid(1, 0, false);
  DepthMap s2 = sample_depth(d, wf);
  CHECK_FALSE(s2.valid_at(0, 0));  // corner invalid
}

TEST_CASE("compose_poses hand cases") {
  CHECK_THROWS_AS(compose_poses({}), InvalidInputError);

  std::vector<RigidPose> ids(3);
  RigidPose r = compose_poses(ids);
  CHECK(r.rotation.norm() == 0.0);
  CHECK(r.translation.norm() == 0.0);

  RigidPose t1, t2;
  t1.translation = Eigen::Vector3d(1, 0, 0);
  t2.translation = Eigen::Vector3d(2, 0, 0);
  RigidPose t3 = compose_poses({t1, t2});
  CHECK((t3.translation - Eigen::Vector3d(3, 0, 0)).norm() < 1e-15);

  RigidPose rz;
  rz.rotation = Eigen::Vector3d(0, 0, M_PI / 2);
  RigidPose rpi = compose_poses({rz, rz});
  Eigen::Matrix3d rm = axis_angle_to_matrix(rpi.rotation);
  CHECK((transform_point({1, 0, 0}, rpi) - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-12);
  CHECK((rm - axis_angle_to_matrix(Eigen::Vector3d(0, 0, M_PI))).norm() < 1e-12);
}

TEST_CASE("chained warp equals direct composed warp") {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> d(-0.1, 0.1);
  Intrinsics k(32.0, 32.0, 15.5, 15.5);
  for (int i = 0; i < 50; ++i) {
    RigidPose a = random_pose(rng, 0.1, 0.2);
    RigidPose b = random_pose(rng, 0.1, 0.2);
    RigidPose ab = compose_poses({a, b});
    Eigen::Vector3d x(d(rng) * 10, d(rng) * 10, 4.0 + d(rng));
    Eigen::Vector3d via = transform_point(transform_point(x, a), b);
    Eigen::Vector3d direct = transform_point(x, ab);
    CHECK((via - direct).norm() < 1e-12);
  }
}

TEST_CASE("intrinsics_for_level follows the half-pixel convention") {
  Intrinsics k(64.0, 64.0, 31.5, 31.5);
  Intrinsics l1 = intrinsics_for_level(k, 1);
  CHECK(l1.fx == 64.0);
  CHECK(l1.cx == 31.5);
  Intrinsics l2 = intrinsics_for_level(k, 2);
  CHECK(l2.fx == 32.0);
  CHECK(l2.cx == 15.5);
  Intrinsics l3 = intrinsics_for_level(k, 3);
  CHECK(l3.fx == 16.0);
  CHECK(l3.cx == 7.5);
}

TEST_CASE("intrinsics validation") {
  CHECK_THROWS_AS(Intrinsics(0.0, 1.0, 0.0, 0.0), InvalidInputError);
  CHECK_THROWS_AS(Intrinsics(1.0, -1.0, 0.0, 0.0), InvalidInputError);
  CHECK_THROWS_AS(Intrinsics(1.0, 1.0, std::nan(""), 0.0), InvalidInputError);
}
