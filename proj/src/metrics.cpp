#include "pba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pba/errors.hpp"

namespace pba {
namespace {

void require_same_dims(const DepthMap& a, const DepthMap& b, const char* who) {
  if (a.width != b.width || a.height != b.height)
    throw InvalidInputError(std::string(who) + ": dimension mismatch");
}

// Nearest-rank lower median: the ceil(n/2)-th smallest value.
double median_of(std::vector<double> v) {
  std::size_t k = (v.size() + 1) / 2;
  std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
  return v[k - 1];
}

}  // namespace

DepthMetrics compute_metrics(const DepthMap& pred, const DepthMap& gt, double cap) {
  require_same_dims(pred, gt, "metrics");
  if (!(cap > 0.0)) throw InvalidInputError("metrics: cap must be positive");
  DepthMetrics m;
  double s_abs = 0.0, s_sq = 0.0, s_rmse = 0.0, s_log = 0.0;
  std::size_t n1 = 0, n2 = 0, n3 = 0;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (!pred.valid[i] || !gt.valid[i]) continue;
    double g = gt.data[i];
    if (!(g > 0.0) || g > cap) continue;
    double p = std::min(cap, std::max(1e-3, pred.data[i]));
    double d = p - g;
    s_abs += std::fabs(d) / g;
    s_sq += d * d / g;
    s_rmse += d * d;
    double dl = std::log(p) - std::log(g);
    s_log += dl * dl;
    double ratio = std::max(p / g, g / p);
    n1 += ratio <= 1.25;
    n2 += ratio <= 1.25 * 1.25;
    n3 += ratio <= 1.25 * 1.25 * 1.25;
    ++m.n_pixels;
  }
  if (m.n_pixels == 0) throw InvalidInputError("metrics: no jointly valid pixels under cap");
  double n = static_cast<double>(m.n_pixels);
  m.abs_rel = s_abs / n;
  m.sq_rel = s_sq / n;
  m.rmse = std::sqrt(s_rmse / n);
  m.rmse_log = std::sqrt(s_log / n);
  m.delta1 = n1 / n;
  m.delta2 = n2 / n;
  m.delta3 = n3 / n;
  return m;
}

DepthMap median_scale(const DepthMap& pred, const DepthMap& gt) {
  require_same_dims(pred, gt, "median_scale");
  std::vector<double> pv, gv;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (pred.valid[i] && gt.valid[i]) {
      pv.push_back(pred.data[i]);
      gv.push_back(gt.data[i]);
    }
  }
  if (pv.empty()) throw InvalidInputError("median_scale: no jointly valid pixels");
  double mp = median_of(std::move(pv));
  double mg = median_of(std::move(gv));
  if (!(mp > 0.0) || !(mg > 0.0))
    throw NumericalError("median_scale: medians must be positive");
  double scale = mg / mp;
  DepthMap out = pred;
  for (double& v : out.data) v *= scale;
  return out;
}

double boundary_error(const DepthMap& pred, const DepthMap& gt, double edge_threshold) {
  require_same_dims(pred, gt, "boundary_error");
  if (!(edge_threshold > 0.0))
    throw InvalidInputError("boundary_error: threshold must be positive");
  const int W = gt.width, H = gt.height;
  std::vector<std::uint8_t> edge(gt.pixel_count(), 0);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      std::size_t p = static_cast<std::size_t>(y) * W + x;
      if (!gt.valid[p]) continue;
      if (x + 1 < W && gt.valid[p + 1] &&
          std::fabs(gt.data[p + 1] - gt.data[p]) > edge_threshold) {
        edge[p] = edge[p + 1] = 1;
      }
      if (y + 1 < H && gt.valid[p + W] &&
          std::fabs(gt.data[p + W] - gt.data[p]) > edge_threshold) {
        edge[p] = edge[p + W] = 1;
      }
    }
  }
  double s = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      std::size_t p = static_cast<std::size_t>(y) * W + x;
      if (!pred.valid[p] || !gt.valid[p]) continue;
      bool near_edge = false;
      for (int ny = std::max(0, y - 1); ny <= std::min(H - 1, y + 1) && !near_edge; ++ny) {
        for (int nx = std::max(0, x - 1); nx <= std::min(W - 1, x + 1); ++nx) {
          if (edge[static_cast<std::size_t>(ny) * W + nx]) {
            near_edge = true;
            break;
          }
        }
      }
      if (!near_edge) continue;
      double d = pred.data[p] - gt.data[p];
      s += d * d;
      ++n;
    }
  }
  if (n == 0) throw InvalidInputError("boundary_error: no boundary pixels above threshold");
  return std::sqrt(s / static_cast<double>(n));
}

}  // namespace pba
