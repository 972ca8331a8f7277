#include "pba/upsample.hpp"

#include <cmath>

#include "pba/errors.hpp"
#include "pba/threading.hpp"
#include "pba/warp.hpp"

namespace pba {
namespace {

// lerp chains keep constant inputs bitwise constant: x + t*(y-x) with x == y
// returns x for any t.
double lerp(double t, double x, double y) { return x + t * (y - x); }

double low_coord(int x_high, int factor, int low_dim) {
  double u = (x_high + 0.5) / factor - 0.5;
  if (u < 0.0) u = 0.0;
  double hi = low_dim - 1.0;
  if (u > hi) u = hi;
  return u;
}

double high_center(int x_low, int factor) { return (x_low + 0.5) * factor - 0.5; }

struct BilinearDepth {
  double value = 0.0;
  bool valid = false;
};

BilinearDepth sample_low(const DepthMap& low, int x, int y, int factor) {
  double u = low_coord(x, factor, low.width);
  double v = low_coord(y, factor, low.height);
  BilinearCell c = bilinear_cell(u, v, low.width, low.height);
  BilinearDepth out;
  if (!c.valid || !low.valid_at(c.x0, c.y0) || !low.valid_at(c.x1, c.y0) ||
      !low.valid_at(c.x0, c.y1) || !low.valid_at(c.x1, c.y1)) {
    return out;
  }
  double r0 = lerp(c.a, low.at(c.x0, c.y0), low.at(c.x1, c.y0));
  double r1 = lerp(c.a, low.at(c.x0, c.y1), low.at(c.x1, c.y1));
  out.value = lerp(c.b, r0, r1);
  out.valid = true;
  return out;
}

}  // namespace

DepthMap bilinear_upsample_depth(const DepthMap& low, int factor) {
  if (factor < 2) throw InvalidInputError("upsample: factor must be >= 2");
  if (low.width < 1 || low.height < 1) throw InvalidInputError("upsample: empty input");
  DepthMap out(low.width * factor, low.height * factor, 0.0, false);
  parallel_row_tiles(out.height, [&](int, int rb, int re) {
    for (int y = rb; y < re; ++y) {
      for (int x = 0; x < out.width; ++x) {
        BilinearDepth s = sample_low(low, x, y, factor);
        out.at(x, y) = s.value;
        out.set_valid(x, y, s.valid);
      }
    }
  });
  return out;
}

GuidedUpsampleResult guided_upsample_depth(const DepthMap& low, const ImageGrid& guide,
                                           int factor, double range_sigma,
                                           double spatial_sigma) {
  if (factor < 2) throw InvalidInputError("upsample: factor must be >= 2");
  if (guide.width != low.width * factor || guide.height != low.height * factor)
    throw InvalidInputError("upsample: guide dimensions must be factor times the input");
  double sig_sp = spatial_sigma > 0.0 ? spatial_sigma : static_cast<double>(factor);
  double sig_r = range_sigma > 0.0 ? range_sigma : 0.1;
  double inv2_sp = 1.0 / (2.0 * sig_sp * sig_sp);
  double inv2_r = 1.0 / (2.0 * sig_r * sig_r);

  // Channel-mean guide plane for range weights.
  std::vector<double> mean_g(guide.pixel_count());
  for (std::size_t p = 0; p < guide.pixel_count(); ++p) {
    double s = 0.0;
    for (int c = 0; c < guide.channels; ++c) s += guide.data[p * guide.channels + c];
    mean_g[p] = s / guide.channels;
  }
  auto sample_mean_g = [&](double u, double v) {
    BilinearCell c = bilinear_cell(u, v, guide.width, guide.height);
    double r0 = lerp(c.a, mean_g[static_cast<std::size_t>(c.y0) * guide.width + c.x0],
                     mean_g[static_cast<std::size_t>(c.y0) * guide.width + c.x1]);
    double r1 = lerp(c.a, mean_g[static_cast<std::size_t>(c.y1) * guide.width + c.x0],
                     mean_g[static_cast<std::size_t>(c.y1) * guide.width + c.x1]);
    return lerp(c.b, r0, r1);
  };

  GuidedUpsampleResult out;
  out.depth = DepthMap(guide.width, guide.height, 0.0, false);
  out.fallback = ValidityMask(guide.width, guide.height, false);
  constexpr int kRadius = 2;

  parallel_row_tiles(guide.height, [&](int, int rb, int re) {
    for (int y = rb; y < re; ++y) {
      for (int x = 0; x < guide.width; ++x) {
        double u = low_coord(x, factor, low.width);
        double v = low_coord(y, factor, low.height);
        int rx = static_cast<int>(std::lround(u));
        int ry = static_cast<int>(std::lround(v));
        double gp = mean_g[static_cast<std::size_t>(y) * guide.width + x];
        double wsum = 0.0, acc = 0.0;
        double anchor = 0.0;
        bool have_anchor = false;
        for (int ly = ry - kRadius; ly <= ry + kRadius; ++ly) {
          if (ly < 0 || ly >= low.height) continue;
          for (int lx = rx - kRadius; lx <= rx + kRadius; ++lx) {
            if (lx < 0 || lx >= low.width || !low.valid_at(lx, ly)) continue;
            double d = low.at(lx, ly);
            if (!have_anchor) {
              anchor = d;
              have_anchor = true;
            }
            double hx = high_center(lx, factor) - x;
            double hy = high_center(ly, factor) - y;
            double gq = sample_mean_g(high_center(lx, factor), high_center(ly, factor));
            double dg = gp - gq;
            double w = std::exp(-(hx * hx + hy * hy) * inv2_sp) *
                       std::exp(-dg * dg * inv2_r);
            wsum += w;
            acc += w * (d - anchor);
          }
        }
        if (have_anchor && wsum > 0.0) {
          out.depth.at(x, y) = anchor + acc / wsum;
          out.depth.set_valid(x, y, true);
        } else {
          BilinearDepth s = sample_low(low, x, y, factor);
          out.depth.at(x, y) = s.value;
          out.depth.set_valid(x, y, s.valid);
          out.fallback.set(x, y, true);
        }
      }
    }
  });
  return out;
}

}  // namespace pba
