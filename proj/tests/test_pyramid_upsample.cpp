#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pba/errors.hpp"
#include "pba/metrics.hpp"
#include "pba/pyramid.hpp"
#include "pba/upsample.hpp"

using namespace pba;

namespace {

ImageGrid random_image(int w, int h, int ch, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  ImageGrid img(w, h, ch);
  for (double& x : img.data) x = d(rng);
  return img;
}

double mean_of(const ImageGrid& img) {
  double s = 0.0;
  for (double v : img.data) s += v;
  return s / static_cast<double>(img.data.size());
}

}  // namespace

TEST_CASE("pyramid of a constant image is constant at every level") {
  Pyramid p = build_pyramid(ImageGrid(16, 12, 2, 0.3125), 4);
  REQUIRE(p.levels.size() == 4);
  for (const ImageGrid& lvl : p.levels) {
    for (double v : lvl.data) CHECK(v == 0.3125);
  }
}

TEST_CASE("4x4 checkerboard pools to constant one-half") {
  ImageGrid img(4, 4, 1);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) img.at(x, y) = (x + y) % 2 ? 1.0 : 0.0;
  }
  Pyramid p = build_pyramid(img, 2);
  for (double v : p.levels[1].data) CHECK(v == 0.5);
}

TEST_CASE("pooling preserves the mean on even dimensions") {
  ImageGrid img = random_image(16, 16, 1, 21u);
  Pyramid p = build_pyramid(img, 4);
  double m0 = mean_of(p.levels[0]);
  for (std::size_t l = 1; l < p.levels.size(); ++l) {
    CHECK(mean_of(p.levels[l]) == doctest::Approx(m0).epsilon(1e-10));
  }
  CHECK(p.levels[0].data == img.data);
}

TEST_CASE("pyramid level dimensions are ceil-half chains") {
  Pyramid p = build_pyramid(ImageGrid(13, 9, 1, 0.0), 3);
  CHECK(p.levels[1].width == 7);
  CHECK(p.levels[1].height == 5);
  CHECK(p.levels[2].width == 4);
  CHECK(p.levels[2].height == 3);
  CHECK_THROWS_AS(build_pyramid(ImageGrid(7, 16, 1, 0.0), 4), InvalidInputError);
}

TEST_CASE("avg_pool_half_backward is the transpose of avg_pool_half") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto [w, h] : {std::pair{6, 4}, std::pair{7, 5}, std::pair{1, 3}, std::pair{8, 1}}) {
    int hw = half_dim(w), hh = half_dim(h);
    std::vector<double> src(static_cast<std::size_t>(w) * h);
    std::vector<double> gdst(static_cast<std::size_t>(hw) * hh);
    for (double& x : src) x = d(rng);
    for (double& x : gdst) x = d(rng);

    std::vector<double> dst(gdst.size(), 0.0);
    avg_pool_half(src.data(), w, h, dst.data());
    std::vector<double> gsrc(src.size(), 0.0);
    avg_pool_half_backward(gdst.data(), w, h, gsrc.data());

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < dst.size(); ++i) lhs += dst[i] * gdst[i];
    for (std::size_t i = 0; i < src.size(); ++i) rhs += src[i] * gsrc[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("pool_chain starts with a copy of the source") {
  std::vector<double> src = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  auto chain = pool_chain(src, 3, 2, 2);
  REQUIRE(chain.size() == 2);
  CHECK(chain[0] == src);
  CHECK(chain[1].size() == 2);
}

TEST_CASE("bilinear upsampling preserves constants exactly") {
  DepthMap low(5, 4, 2.7182818);
  for (int factor : {2, 3, 4}) {
    DepthMap up = bilinear_upsample_depth(low, factor);
    CHECK(up.width == 5 * factor);
    CHECK(up.height == 4 * factor);
    for (std::size_t i = 0; i < up.pixel_count(); ++i) {
      CHECK(up.valid[i] == 1);
      CHECK(up.data[i] == 2.7182818);
    }
  }
  CHECK_THROWS_AS(bilinear_upsample_depth(low, 1), InvalidInputError);
}

TEST_CASE("bilinear upsampling of a step contains blends and hits the exact midpoint") {
  DepthMap low(4, 1);
  low.data = {1.0, 1.0, 5.0, 5.0};
  DepthMap up = bilinear_upsample_depth(low, 2);
  bool blended = false;
  for (double v : up.data) {
    CHECK(v >= 1.0);
    CHECK(v <= 5.0);
    if (v > 1.0 && v < 5.0) blended = true;
  }
  CHECK(blended);

  // Under the half-pixel mapping no output center lands exactly on the
  // low-res midpoint; the profile is symmetric about the midpoint value 3.
  DepthMap pair(2, 1);
  pair.data = {1.0, 5.0};
  DepthMap up4 = bilinear_upsample_depth(pair, 4);
  REQUIRE(up4.width == 8);
  REQUIRE(up4.height == 4);
  CHECK(up4.data[2] == 1.5);
  CHECK(up4.data[3] == 2.5);
  CHECK(up4.data[4] == 3.5);
  for (int x = 0; x < 4; ++x) CHECK(up4.data[x] + up4.data[7 - x] == 6.0);
  CHECK((up4.data[3] + up4.data[4]) * 0.5 == 3.0);
  for (int y = 1; y < 4; ++y)
    for (int x = 0; x < 8; ++x) CHECK(up4.at(x, y) == up4.at(x, 0));
}

TEST_CASE("guided upsampling preserves constants and stays in the hull") {
  ImageGrid guide = random_image(20, 16, 1, 41u);
  DepthMap low(5, 4, 3.25);
  GuidedUpsampleResult r = guided_upsample_depth(low, guide, 4);
  CHECK(r.fallback.count() == 0);
  for (std::size_t i = 0; i < r.depth.pixel_count(); ++i) {
    CHECK(r.depth.valid[i] == 1);
    CHECK(r.depth.data[i] == 3.25);
  }

  std::mt19937 rng(43);
  std::uniform_real_distribution<double> d(1.0, 9.0);
  DepthMap rnd(5, 4);
  double lo = 9.0, hi = 1.0;
  for (double& x : rnd.data) {
    x = d(rng);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  GuidedUpsampleResult r2 = guided_upsample_depth(rnd, guide, 4);
  for (std::size_t i = 0; i < r2.depth.pixel_count(); ++i) {
    CHECK(r2.depth.data[i] >= lo - 1e-12);
    CHECK(r2.depth.data[i] <= hi + 1e-12);
  }
}

TEST_CASE("huge range sigma reduces guided filtering to the spatial filter") {
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> d(1.0, 5.0);
  DepthMap low(6, 6);
  for (double& x : low.data) x = d(rng);
  ImageGrid textured = random_image(12, 12, 3, 48u);
  ImageGrid flat(12, 12, 3, 0.5);
  GuidedUpsampleResult wide = guided_upsample_depth(low, textured, 2, 1e12);
  GuidedUpsampleResult spatial = guided_upsample_depth(low, flat, 2, 0.1);
  REQUIRE(wide.depth.data.size() == spatial.depth.data.size());
  for (std::size_t i = 0; i < wide.depth.data.size(); ++i) {
    CHECK(wide.depth.data[i] == doctest::Approx(spatial.depth.data[i]).epsilon(1e-9));
  }
}

TEST_CASE("guided upsampling validates guide dimensions") {
  DepthMap low(4, 4, 1.0);
  CHECK_THROWS_AS(guided_upsample_depth(low, ImageGrid(7, 8, 1), 2), InvalidInputError);
  CHECK_THROWS_AS(guided_upsample_depth(low, ImageGrid(8, 8, 1), 1), InvalidInputError);
}

TEST_CASE("guided beats bilinear on the boundary of an aligned step scene") {
  for (int factor : {2, 4}) {
    int lw = 16, lh = 12;
    int hw = lw * factor, hh = lh * factor;
    DepthMap low(lw, lh);
    for (int y = 0; y < lh; ++y) {
      for (int x = 0; x < lw; ++x) low.at(x, y) = x < lw / 2 ? 2.0 : 6.0;
    }
    DepthMap gt(hw, hh);
    ImageGrid guide(hw, hh, 1);
    for (int y = 0; y < hh; ++y) {
      for (int x = 0; x < hw; ++x) {
        bool near_side = x < hw / 2;
        gt.at(x, y) = near_side ? 2.0 : 6.0;
        guide.at(x, y) = near_side ? 0.2 : 0.8;
      }
    }
    DepthMap bi = bilinear_upsample_depth(low, factor);
    GuidedUpsampleResult gu = guided_upsample_depth(low, guide, factor);
    double be_bi = boundary_error(bi, gt, 1.0);
    double be_gu = boundary_error(gu.depth, gt, 1.0);
    CHECK(be_gu < be_bi);
    CHECK(be_bi > 0.0);
  }
}
