// Compiled with -mavx2 -mfma. Nothing in here may run before cpu_has_avx2() says so.
#include <immintrin.h>

#include "ingarch/simd/kernels.hpp"

namespace ingarch::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

Gram3 gram3_avx2(const double* c0, const double* c1, const double* c2, const double* w,
                 const double* k, std::size_t n) {
  __m256d s00 = _mm256_setzero_pd(), s01 = s00, s02 = s00, s11 = s00, s12 = s00, s22 = s00;
  __m256d r0 = s00, r1 = s00, r2 = s00;
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    const __m256d a = _mm256_loadu_pd(c0 + t);
    const __m256d b = _mm256_loadu_pd(c1 + t);
    const __m256d c = _mm256_loadu_pd(c2 + t);
    const __m256d wt = _mm256_loadu_pd(w + t);
    const __m256d kt = _mm256_loadu_pd(k + t);
    const __m256d wa = _mm256_mul_pd(wt, a);
    const __m256d wb = _mm256_mul_pd(wt, b);
    s00 = _mm256_fmadd_pd(wa, a, s00);
    s01 = _mm256_fmadd_pd(wa, b, s01);
    s02 = _mm256_fmadd_pd(wa, c, s02);
    s11 = _mm256_fmadd_pd(wb, b, s11);
    s12 = _mm256_fmadd_pd(wb, c, s12);
    s22 = _mm256_fmadd_pd(_mm256_mul_pd(wt, c), c, s22);
    r0 = _mm256_fmadd_pd(a, kt, r0);
    r1 = _mm256_fmadd_pd(b, kt, r1);
    r2 = _mm256_fmadd_pd(c, kt, r2);
  }
  Gram3 g{hsum(s00), hsum(s01), hsum(s02), hsum(s11), hsum(s12), hsum(s22),
          hsum(r0),  hsum(r1),  hsum(r2)};
  for (; t < n; ++t) {
    const double a = c0[t], b = c1[t], c = c2[t], wt = w[t];
    g.s00 += wt * a * a;
    g.s01 += wt * a * b;
    g.s02 += wt * a * c;
    g.s11 += wt * b * b;
    g.s12 += wt * b * c;
    g.s22 += wt * c * c;
    g.r0 += a * k[t];
    g.r1 += b * k[t];
    g.r2 += c * k[t];
  }
  return g;
}

double poisson_loglik_avx2(const double* x, const double* log_lambda, const double* lambda,
                           const double* log_fact, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 8 <= n; t += 8) {
    const __m256d sub0 = _mm256_add_pd(_mm256_loadu_pd(lambda + t), _mm256_loadu_pd(log_fact + t));
    const __m256d sub1 =
        _mm256_add_pd(_mm256_loadu_pd(lambda + t + 4), _mm256_loadu_pd(log_fact + t + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_fmsub_pd(_mm256_loadu_pd(x + t),
                                               _mm256_loadu_pd(log_lambda + t), sub0));
    acc1 = _mm256_add_pd(acc1, _mm256_fmsub_pd(_mm256_loadu_pd(x + t + 4),
                                               _mm256_loadu_pd(log_lambda + t + 4), sub1));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; t < n; ++t) s += x[t] * log_lambda[t] - lambda[t] - log_fact[t];
  return s;
}

double lagged_dot_avx2(const double* a, std::size_t n, std::size_t lag) {
  if (lag >= n) return 0.0;
  const std::size_t m = n - lag;
  const double* b = a + lag;
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= m; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < m; ++i) s += a[i] * b[i];
  return s;
}

double weighted_sum_avx2(const double* w, const double* h, std::size_t n, double* weighted) {
  __m256d sw = _mm256_setzero_pd(), swh = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wi = _mm256_loadu_pd(w + i);
    sw = _mm256_add_pd(sw, wi);
    swh = _mm256_fmadd_pd(wi, _mm256_loadu_pd(h + i), swh);
  }
  double total = hsum(sw), total_h = hsum(swh);
  for (; i < n; ++i) {
    total += w[i];
    total_h += w[i] * h[i];
  }
  *weighted = total_h;
  return total;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{gram3_avx2, poisson_loglik_avx2, lagged_dot_avx2,
                                 weighted_sum_avx2, "avx2"};
  return &table;
}

}  // namespace ingarch::simd
