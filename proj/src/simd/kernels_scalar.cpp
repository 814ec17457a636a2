#include "ingarch/simd/kernels.hpp"

namespace ingarch::simd {
namespace {

Gram3 gram3_scalar(const double* c0, const double* c1, const double* c2, const double* w,
                   const double* k, std::size_t n) {
  Gram3 g;
  for (std::size_t t = 0; t < n; ++t) {
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

double poisson_loglik_scalar(const double* x, const double* log_lambda, const double* lambda,
                             const double* log_fact, std::size_t n) {
  double s = 0.0;
  for (std::size_t t = 0; t < n; ++t) s += x[t] * log_lambda[t] - lambda[t] - log_fact[t];
  return s;
}

double lagged_dot_scalar(const double* a, std::size_t n, std::size_t lag) {
  double s = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) s += a[i] * a[i + lag];
  return s;
}

double weighted_sum_scalar(const double* w, const double* h, std::size_t n, double* weighted) {
  double sw = 0.0, swh = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    swh += w[i] * h[i];
  }
  *weighted = swh;
  return sw;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{gram3_scalar, poisson_loglik_scalar, lagged_dot_scalar,
                                 weighted_sum_scalar, "scalar"};
  return table;
}

}  // namespace ingarch::simd
