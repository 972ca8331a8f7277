#pragma once

#include <cstddef>

namespace pba::kernels {

// Data-parallel inner loops used by the cost and optimizer pipelines.
// Each kernel has a scalar reference implementation and, on x86 with AVX2,
// a vectorized variant selected at runtime. The two backends are bitwise
// equivalent:
//
//   - elementwise kernels perform the identical IEEE operation per element;
//   - reductions stripe the input across 4 running accumulators (lane j
//     takes elements with index == j mod 4 over the first 4*floor(n/4)
//     elements), combine them as (s0+s2)+(s1+s3), and fold any tail
//     sequentially. Both backends implement this exact order.
//
// Inputs are assumed finite; NaN propagation is unspecified.
struct Backend {
  const char* name;

  // sum of v[0..n)
  double (*sum)(const double* v, std::size_t n);
  // sum of min(v[i], clip)
  double (*sum_clipped)(const double* v, std::size_t n, double clip);
  // max of v[0..n); n == 0 yields -infinity
  double (*max)(const double* v, std::size_t n);
  // out[i] = |a[i] - b[i]|
  void (*abs_diff)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = min(v[i], clip)
  void (*clip_upper)(const double* v, double clip, double* out, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*multiply)(const double* a, const double* b, double* out, std::size_t n);
  // 2x2 average pooling of one output row from two even-width input rows:
  // out[i] = ((r0[2i] + r0[2i+1]) + (r1[2i] + r1[2i+1])) * 0.25
  void (*avg_pool2x2)(const double* r0, const double* r1, double* out, std::size_t w_out);
  // Bias-corrected Adam update. Caller passes a = lr / (1 - beta1^t) and
  // b = 1 / sqrt(1 - beta2^t):
  //   m[i] = beta1*m[i] + (1-beta1)*g[i]
  //   v[i] = beta2*v[i] + (1-beta2)*g[i]*g[i]
  //   p[i] -= a * m[i] / (b * sqrt(v[i]) + eps)
  void (*adam_update)(double* p, double* m, double* v, const double* g, std::size_t n,
                      double a, double b, double beta1, double beta2, double eps);
};

const Backend& scalar_backend();

#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
bool cpu_has_avx2();
#endif

// Active backend: AVX2 when the CPU supports it, unless the environment
// variable PHOTOBA_SIMD forces "scalar" (or "avx2").
const Backend& active();

// Test hook: force a backend by name ("scalar"/"avx2"), or nullptr to
// restore automatic selection.
void force_backend(const char* name);

}  // namespace pba::kernels
