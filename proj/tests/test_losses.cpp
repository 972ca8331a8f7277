#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pba/errors.hpp"
#include "pba/losses.hpp"

using namespace pba;

namespace {

// Independent nearest-rank oracle over a full sort.
double sort_percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()) / 100.0));
  if (k < 1) k = 1;
  return v[k - 1];
}

}  // namespace

TEST_CASE("percentile hand cases") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i + 1;
  std::mt19937 rng(3);
  std::shuffle(v.begin(), v.end(), rng);
  CHECK(percentile(v, 95.0) == 95.0);
  CHECK(percentile(v, 100.0) == 100.0);
  CHECK(percentile(v, 1.0) == 1.0);
  CHECK(percentile(std::vector<double>{7.0}, 42.0) == 7.0);
  CHECK_THROWS_AS(percentile(std::vector<double>{}, 50.0), NumericalError);
  CHECK_THROWS_AS(percentile(std::vector<double>{1.0}, 0.0), InvalidInputError);
  CHECK_THROWS_AS(percentile(std::vector<double>{1.0}, 100.5), InvalidInputError);
}

TEST_CASE("percentile agrees with a full-sort oracle on 1000 random multisets") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> size_d(1, 64);
  std::uniform_int_distribution<int> val_d(0, 9);
  std::uniform_real_distribution<double> q_d(0.001, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = size_d(rng);
    std::vector<double> v(n);
    for (double& x : v) x = 0.5 * val_d(rng);  // duplicates on purpose
    double q = q_d(rng);
    CHECK(percentile(v, q) == sort_percentile(v, q));
  }
}

TEST_CASE("percentile of a cost field uses only valid entries") {
  CostField f(3, 2);
  double vals[] = {5.0, 1.0, 9.0, 2.0, 7.0, 3.0};
  for (std::size_t i = 0; i < 6; ++i) {
    f.cost[i] = vals[i];
    f.valid[i] = i % 2 == 0 ? 1 : 0;  // keeps {5, 9, 7}
  }
  CHECK(gather_valid_costs(f) == std::vector<double>{5.0, 9.0, 7.0});
  CHECK(percentile(f, 100.0) == 9.0);
  CHECK(percentile(f, 50.0) == 7.0);
}

TEST_CASE("clip_costs hand cases") {
  CostField f(3, 1);
  f.cost = {1.0, 2.0, 10.0};
  f.valid = {1, 1, 1};
  CostField c = clip_costs(f, 2.0);
  CHECK(c.cost == std::vector<double>{1.0, 2.0, 2.0});
  CHECK(c.valid == f.valid);

  CostField untouched = clip_costs(f, 10.0);
  CHECK(untouched.cost == f.cost);

  CHECK_THROWS_AS(clip_costs(f, -1.0), InvalidInputError);
}

TEST_CASE("clipped mean of 1..100 at the q=95 threshold") {
  CostField f(10, 10);
  for (int i = 0; i < 100; ++i) {
    f.cost[i] = i + 1;
    f.valid[i] = 1;
  }
  double thr = percentile(f, 95.0);
  CHECK(thr == 95.0);
  CostField c = clip_costs(f, thr);
  double sum = 0.0;
  for (double v : c.cost) sum += v;
  CHECK(sum / 100.0 == doctest::Approx(50.35).epsilon(1e-12));
}

TEST_CASE("clip_costs is monotone and 1-Lipschitz; thresholds rise with q") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(0.0, 4.0);
  CostField f(8, 8);
  for (std::size_t i = 0; i < 64; ++i) {
    f.cost[i] = d(rng);
    f.valid[i] = 1;
  }
  CostField g = f;
  for (std::size_t i = 0; i < 64; ++i) g.cost[i] += std::abs(d(rng)) * 0.1;
  double thr = percentile(f, 80.0);
  CostField cf = clip_costs(f, thr), cg = clip_costs(g, thr);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(cg.cost[i] >= cf.cost[i]);                            // monotone
    CHECK(cg.cost[i] - cf.cost[i] <= g.cost[i] - f.cost[i]);    // 1-Lipschitz
  }
  double prev = 0.0;
  for (double q : {10.0, 35.0, 60.0, 95.0, 100.0}) {
    double t = percentile(f, q);
    CHECK(t >= prev);
    prev = t;
  }
}

TEST_CASE("clipping at the q=100 threshold is the identity") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> d(0.0, 3.0);
  CostField f(9, 5);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    f.cost[i] = d(rng);
    f.valid[i] = 1;
  }
  CostField c = clip_costs(f, percentile(f, 100.0));
  CHECK(c.cost == f.cost);
}

TEST_CASE("depth_consistency_cost hand cases") {
  DepthMap a(4, 3, 2.0), b(4, 3, 2.5);
  ValidityMask mask(4, 3, true);
  mask.set(0, 0, false);
  CostField c = depth_consistency_cost(a, b, mask);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 4; ++x) {
      std::size_t i = static_cast<std::size_t>(y) * 4 + x;
      if (x == 0 && y == 0) {
        CHECK(c.valid[i] == 0);
      } else {
        CHECK(c.valid[i] == 1);
        CHECK(c.cost[i] == 0.5);
      }
    }
  }
  CostField zero = depth_consistency_cost(a, a, mask);
  for (std::size_t i = 0; i < zero.pixel_count(); ++i) {
    if (zero.valid[i]) CHECK(zero.cost[i] == 0.0);
  }

  b.set_valid(1, 1, false);
  CostField holed = depth_consistency_cost(a, b, mask);
  CHECK(holed.valid[static_cast<std::size_t>(1) * 4 + 1] == 0);
}

TEST_CASE("smoothness_cost hand cases") {
  DepthMap flat(5, 4, 0.37);
  ImageGrid img(5, 4, 1, 0.5);
  CHECK(smoothness_cost(flat, img) == 0.0);

  // Disparity step of 1 across the middle column, constant image: each of
  // the h rows contributes e^0 * 1.
  DepthMap step(4, 3, 1.0);
  for (int y = 0; y < 3; ++y) {
    step.at(2, y) = 2.0;
    step.at(3, y) = 2.0;
  }
  CHECK(smoothness_cost(step, ImageGrid(4, 3, 1, 0.25)) == doctest::Approx(3.0).epsilon(1e-14));

  // Same step co-located with an image step of channel-mean magnitude g.
  double g = 0.4;
  DepthMap d2(2, 2, 1.0);
  d2.at(1, 0) = 2.0;
  d2.at(1, 1) = 2.0;
  ImageGrid i2(2, 2, 1, 0.1);
  i2.at(1, 0) = 0.1 + g;
  i2.at(1, 1) = 0.1 + g;
  CHECK(smoothness_cost(d2, i2) == doctest::Approx(2.0 * std::exp(-g)).epsilon(1e-14));
}

TEST_CASE("smoothness_cost skips pairs with an invalid endpoint") {
  DepthMap d(3, 1, 1.0);
  d.at(1, 0) = 5.0;
  d.set_valid(1, 0, false);
  CHECK(smoothness_cost(d, ImageGrid(3, 1, 1, 0.0)) == 0.0);
}

TEST_CASE("loss weights validation") {
  LossWeights w;
  CHECK_NOTHROW(w.validate());
  w.ssim_mix = 1.5;
  CHECK_THROWS_AS(w.validate(), InvalidInputError);
  w = LossWeights{};
  w.clip_percentile = 0.0;
  CHECK_THROWS_AS(w.validate(), InvalidInputError);
  w = LossWeights{};
  w.dc_weight = -0.1;
  CHECK_THROWS_AS(w.validate(), InvalidInputError);
  w = LossWeights{};
  w.smooth_weight = -1.0;
  CHECK_THROWS_AS(w.validate(), InvalidInputError);
}
