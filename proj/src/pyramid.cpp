#include "pba/pyramid.hpp"

#include <algorithm>

#include "pba/errors.hpp"
#include "pba/kernels/kernels.hpp"

namespace pba {

void avg_pool_half(const double* src, int w, int h, double* dst) {
  int ow = half_dim(w), oh = half_dim(h);
  int even_w = w / 2;  // full 2x2 cells per row pair
  for (int oy = 0; oy < oh; ++oy) {
    int y0 = 2 * oy;
    int y1 = y0 + 1;
    double* out_row = dst + static_cast<std::size_t>(oy) * ow;
    const double* r0 = src + static_cast<std::size_t>(y0) * w;
    if (y1 < h) {
      const double* r1 = src + static_cast<std::size_t>(y1) * w;
      kernels::active().avg_pool2x2(r0, r1, out_row, even_w);
      if (even_w < ow) out_row[even_w] = (r0[w - 1] + r1[w - 1]) * 0.5;
    } else {
      for (int ox = 0; ox < even_w; ++ox) {
        out_row[ox] = (r0[2 * ox] + r0[2 * ox + 1]) * 0.5;
      }
      if (even_w < ow) out_row[even_w] = r0[w - 1];
    }
  }
}

void avg_pool_half_backward(const double* grad_dst, int w, int h, double* grad_src) {
  int ow = half_dim(w), oh = half_dim(h);
  for (int oy = 0; oy < oh; ++oy) {
    int y0 = 2 * oy;
    int y1 = y0 + 1;
    for (int ox = 0; ox < ow; ++ox) {
      int x0 = 2 * ox;
      int x1 = x0 + 1;
      double g = grad_dst[static_cast<std::size_t>(oy) * ow + ox];
      bool has_x = x1 < w, has_y = y1 < h;
      double share = g * (has_x && has_y ? 0.25 : (has_x || has_y ? 0.5 : 1.0));
      grad_src[static_cast<std::size_t>(y0) * w + x0] += share;
      if (has_x) grad_src[static_cast<std::size_t>(y0) * w + x1] += share;
      if (has_y) {
        grad_src[static_cast<std::size_t>(y1) * w + x0] += share;
        if (has_x) grad_src[static_cast<std::size_t>(y1) * w + x1] += share;
      }
    }
  }
}

std::vector<std::vector<double>> pool_chain(const std::vector<double>& src, int w, int h,
                                            int levels) {
  std::vector<std::vector<double>> out;
  out.reserve(levels);
  out.push_back(src);
  int lw = w, lh = h;
  for (int l = 1; l < levels; ++l) {
    int nw = half_dim(lw), nh = half_dim(lh);
    std::vector<double> next(static_cast<std::size_t>(nw) * nh);
    avg_pool_half(out.back().data(), lw, lh, next.data());
    out.push_back(std::move(next));
    lw = nw;
    lh = nh;
  }
  return out;
}

Pyramid build_pyramid(const ImageGrid& img, int levels) {
  if (levels < 1) throw InvalidInputError("build_pyramid: levels must be >= 1");
  int min_dim = std::min(img.width, img.height);
  if (min_dim < (1 << (levels - 1)))
    throw InvalidInputError("build_pyramid: image too small for requested levels");
  Pyramid pyr;
  pyr.levels.push_back(img);
  for (int l = 1; l < levels; ++l) {
    const ImageGrid& prev = pyr.levels.back();
    ImageGrid next(half_dim(prev.width), half_dim(prev.height), prev.channels);
    for (int oy = 0; oy < next.height; ++oy) {
      int y0 = 2 * oy;
      int y1 = y0 + 1 < prev.height ? y0 + 1 : y0;
      for (int ox = 0; ox < next.width; ++ox) {
        int x0 = 2 * ox;
        int x1 = x0 + 1 < prev.width ? x0 + 1 : x0;
        bool has_x = x1 != x0, has_y = y1 != y0;
        for (int c = 0; c < prev.channels; ++c) {
          double v;
          if (has_x && has_y) {
            v = ((prev.at(x0, y0, c) + prev.at(x1, y0, c)) +
                 (prev.at(x0, y1, c) + prev.at(x1, y1, c))) *
                0.25;
          } else if (has_x) {
            v = (prev.at(x0, y0, c) + prev.at(x1, y0, c)) * 0.5;
          } else if (has_y) {
            v = (prev.at(x0, y0, c) + prev.at(x0, y1, c)) * 0.5;
          } else {
            v = prev.at(x0, y0, c);
          }
          next.at(ox, oy, c) = v;
        }
      }
    }
    pyr.levels.push_back(std::move(next));
  }
  return pyr;
}

}  // namespace pba
