#include "pba/kernels/kernels.hpp"

#include <cmath>
#include <limits>

namespace pba::kernels {
namespace {

double sum_scalar(const double* v, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += v[i];
    s1 += v[i + 1];
    s2 += v[i + 2];
    s3 += v[i + 3];
  }
  double s = (s0 + s2) + (s1 + s3);
  for (std::size_t i = n4; i < n; ++i) s += v[i];
  return s;
}

double sum_clipped_scalar(const double* v, std::size_t n, double clip) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += v[i] < clip ? v[i] : clip;
    s1 += v[i + 1] < clip ? v[i + 1] : clip;
    s2 += v[i + 2] < clip ? v[i + 2] : clip;
    s3 += v[i + 3] < clip ? v[i + 3] : clip;
  }
  double s = (s0 + s2) + (s1 + s3);
  for (std::size_t i = n4; i < n; ++i) s += v[i] < clip ? v[i] : clip;
  return s;
}

double max_scalar(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] > m) m = v[i];
  }
  return m;
}

void abs_diff_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(a[i] - b[i]);
}

void clip_upper_scalar(const double* v, double clip, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i] < clip ? v[i] : clip;
}

void multiply_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void avg_pool2x2_scalar(const double* r0, const double* r1, double* out, std::size_t w_out) {
  for (std::size_t i = 0; i < w_out; ++i) {
    out[i] = ((r0[2 * i] + r0[2 * i + 1]) + (r1[2 * i] + r1[2 * i + 1])) * 0.25;
  }
}

void adam_update_scalar(double* p, double* m, double* v, const double* g, std::size_t n,
                        double a, double b, double beta1, double beta2, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    p[i] -= a * m[i] / (b * std::sqrt(v[i]) + eps);
  }
}

const Backend kScalar = {
    "scalar",        sum_scalar,      sum_clipped_scalar, max_scalar,
    abs_diff_scalar, clip_upper_scalar, multiply_scalar,  avg_pool2x2_scalar,
    adam_update_scalar,
};

}  // namespace

const Backend& scalar_backend() { return kScalar; }

}  // namespace pba::kernels
