#include "pba/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <limits>

// This translation unit is compiled with -mavx2 and without -mfma so that
// no fused multiply-adds are emitted; every arithmetic op matches the
// scalar backend bit for bit.

namespace pba::kernels {
namespace {

// (s0+s2)+(s1+s3) over the four lanes of acc.
inline double hsum_striped(__m256d acc) {
  __m128d lo = _mm256_castpd256_pd128(acc);       // (s0, s1)
  __m128d hi = _mm256_extractf128_pd(acc, 1);     // (s2, s3)
  __m128d t = _mm_add_pd(lo, hi);                 // (s0+s2, s1+s3)
  return _mm_cvtsd_f64(t) + _mm_cvtsd_f64(_mm_unpackhi_pd(t, t));
}

double sum_avx2(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(v + i));
  }
  double s = hsum_striped(acc);
  for (std::size_t i = n4; i < n; ++i) s += v[i];
  return s;
}

double sum_clipped_avx2(const double* v, std::size_t n, double clip) {
  __m256d acc = _mm256_setzero_pd();
  __m256d c = _mm256_set1_pd(clip);
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_min_pd(_mm256_loadu_pd(v + i), c));
  }
  double s = hsum_striped(acc);
  for (std::size_t i = n4; i < n; ++i) s += v[i] < clip ? v[i] : clip;
  return s;
}

double max_avx2(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  __m256d acc = _mm256_set1_pd(m);
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_max_pd(acc, _mm256_loadu_pd(v + i));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (double lane : lanes) {
    if (lane > m) m = lane;
  }
  for (std::size_t i = n4; i < n; ++i) {
    if (v[i] > m) m = v[i];
  }
  return m;
}

void abs_diff_avx2(const double* a, const double* b, double* out, std::size_t n) {
  __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_andnot_pd(sign, d));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = std::fabs(a[i] - b[i]);
}

void clip_upper_avx2(const double* v, double clip, double* out, std::size_t n) {
  __m256d c = _mm256_set1_pd(clip);
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_loadu_pd(v + i), c));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = v[i] < clip ? v[i] : clip;
}

void multiply_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = a[i] * b[i];
}

void avg_pool2x2_avx2(const double* r0, const double* r1, double* out, std::size_t w_out) {
  __m256d quarter = _mm256_set1_pd(0.25);
  std::size_t n4 = w_out & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    // hadd interleaves the 128-bit halves; permute restores output order.
    __m256d t0 = _mm256_hadd_pd(_mm256_loadu_pd(r0 + 2 * i), _mm256_loadu_pd(r0 + 2 * i + 4));
    __m256d t1 = _mm256_hadd_pd(_mm256_loadu_pd(r1 + 2 * i), _mm256_loadu_pd(r1 + 2 * i + 4));
    __m256d s = _mm256_mul_pd(_mm256_add_pd(t0, t1), quarter);
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(s, 0b11011000));
  }
  for (std::size_t i = n4; i < w_out; ++i) {
    out[i] = ((r0[2 * i] + r0[2 * i + 1]) + (r1[2 * i] + r1[2 * i + 1])) * 0.25;
  }
}

void adam_update_avx2(double* p, double* m, double* v, const double* g, std::size_t n,
                      double a, double b, double beta1, double beta2, double eps) {
  __m256d va = _mm256_set1_pd(a);
  __m256d vb = _mm256_set1_pd(b);
  __m256d vb1 = _mm256_set1_pd(beta1);
  __m256d vb2 = _mm256_set1_pd(beta2);
  __m256d vc1 = _mm256_set1_pd(1.0 - beta1);
  __m256d vc2 = _mm256_set1_pd(1.0 - beta2);
  __m256d veps = _mm256_set1_pd(eps);
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(vc1, gi));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(vc2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    __m256d denom = _mm256_add_pd(_mm256_mul_pd(vb, _mm256_sqrt_pd(vi)), veps);
    __m256d upd = _mm256_div_pd(_mm256_mul_pd(va, mi), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
  }
  for (std::size_t i = n4; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    p[i] -= a * m[i] / (b * std::sqrt(v[i]) + eps);
  }
}

const Backend kAvx2 = {
    "avx2",        sum_avx2,        sum_clipped_avx2, max_avx2,
    abs_diff_avx2, clip_upper_avx2, multiply_avx2,    avg_pool2x2_avx2,
    adam_update_avx2,
};

}  // namespace

const Backend& avx2_backend() { return kAvx2; }

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") != 0; }

}  // namespace pba::kernels

#endif  // x86-64
