#include "pba/ssim.hpp"

#include "pba/errors.hpp"
#include "pba/threading.hpp"

namespace pba {

SsimStats ssim_stats(const ImageGrid& x, const ImageGrid& y) {
  if (!x.same_dims(y)) throw InvalidInputError("ssim: image dimensions must match");
  SsimStats s;
  s.width = x.width;
  s.height = x.height;
  s.channels = x.channels;
  std::size_t total = s.plane() * x.channels;
  s.mu_x.resize(total);
  s.mu_y.resize(total);
  s.var_x.resize(total);
  s.var_y.resize(total);
  s.cov.resize(total);

  int W = x.width, H = x.height, CH = x.channels;
  parallel_row_tiles(H, [&](int, int row_begin, int row_end) {
    for (int py = row_begin; py < row_end; ++py) {
      for (int px = 0; px < W; ++px) {
        int x0 = px > 0 ? px - 1 : 0;
        int x1 = px < W - 1 ? px + 1 : W - 1;
        int y0 = py > 0 ? py - 1 : 0;
        int y1 = py < H - 1 ? py + 1 : H - 1;
        double inv_np = 1.0 / ((x1 - x0 + 1) * (y1 - y0 + 1));
        for (int c = 0; c < CH; ++c) {
          double sx = 0.0, sy = 0.0;
          for (int wy = y0; wy <= y1; ++wy) {
            for (int wx = x0; wx <= x1; ++wx) {
              sx += x.at(wx, wy, c);
              sy += y.at(wx, wy, c);
            }
          }
          double mx = sx * inv_np;
          double my = sy * inv_np;
          double vx = 0.0, vy = 0.0, cv = 0.0;
          for (int wy = y0; wy <= y1; ++wy) {
            for (int wx = x0; wx <= x1; ++wx) {
              double dx = x.at(wx, wy, c) - mx;
              double dy = y.at(wx, wy, c) - my;
              vx += dx * dx;
              vy += dy * dy;
              cv += dx * dy;
            }
          }
          std::size_t i = c * s.plane() + static_cast<std::size_t>(py) * W + px;
          s.mu_x[i] = mx;
          s.mu_y[i] = my;
          s.var_x[i] = vx * inv_np;
          s.var_y[i] = vy * inv_np;
          s.cov[i] = cv * inv_np;
        }
      }
    }
  });
  return s;
}

std::vector<double> ssim_map(const ImageGrid& x, const ImageGrid& y) {
  SsimStats s = ssim_stats(x, y);
  std::size_t plane = s.plane();
  std::vector<double> out(plane, 0.0);
  for (std::size_t p = 0; p < plane; ++p) {
    double acc = 0.0;
    for (int c = 0; c < s.channels; ++c) {
      std::size_t i = c * plane + p;
      acc += ssim_value(s.mu_x[i], s.mu_y[i], s.var_x[i], s.var_y[i], s.cov[i]);
    }
    out[p] = acc / s.channels;
  }
  return out;
}

}  // namespace pba
