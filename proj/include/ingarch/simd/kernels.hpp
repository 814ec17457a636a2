#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2/FMA version chosen at runtime. Results of the two agree up
// to floating-point reassociation; tests/unit/test_simd.cpp pins the bounds.

#include <cstddef>
#include <span>
#include <string_view>

namespace ingarch::simd {

/// Sufficient statistics of a weighted least-squares problem with three regressors:
/// the upper triangle of sum_t w_t J_t J_t^T and the vector sum_t J_t k_t.
struct Gram3 {
  double s00 = 0, s01 = 0, s02 = 0, s11 = 0, s12 = 0, s22 = 0;
  double r0 = 0, r1 = 0, r2 = 0;
};

struct KernelTable {
  Gram3 (*gram3)(const double* c0, const double* c1, const double* c2, const double* w,
                 const double* k, std::size_t n);
  /// sum_t x_t * log_lambda_t - lambda_t - log_fact_t
  double (*poisson_loglik)(const double* x, const double* log_lambda, const double* lambda,
                           const double* log_fact, std::size_t n);
  /// sum_{i < n - lag} a_i * a_{i + lag}
  double (*lagged_dot)(const double* a, std::size_t n, std::size_t lag);
  /// Returns sum_i w_i and writes sum_i w_i * h_i into *weighted.
  double (*weighted_sum)(const double* w, const double* h, std::size_t n, double* weighted);
  const char* name;
};

enum class Isa { Scalar, Avx2 };

const KernelTable& scalar_kernels();
/// nullptr when the AVX2 translation unit was not built.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

/// Kernel table used by the library. Picks AVX2 when the CPU supports it unless the
/// environment variable INGARCH_SIMD=scalar forces the reference path.
const KernelTable& active();
Isa active_isa();
/// Test hook: force a table for the remainder of the process.
void force(Isa isa);

// Convenience wrappers over the active table.
inline Gram3 gram3(std::span<const double> c0, std::span<const double> c1,
                   std::span<const double> c2, std::span<const double> w,
                   std::span<const double> k) {
  return active().gram3(c0.data(), c1.data(), c2.data(), w.data(), k.data(), w.size());
}

inline double poisson_loglik(std::span<const double> x, std::span<const double> log_lambda,
                             std::span<const double> lambda, std::span<const double> log_fact) {
  return active().poisson_loglik(x.data(), log_lambda.data(), lambda.data(), log_fact.data(),
                                 x.size());
}

inline double lagged_dot(std::span<const double> a, std::size_t lag) {
  return active().lagged_dot(a.data(), a.size(), lag);
}

}  // namespace ingarch::simd
