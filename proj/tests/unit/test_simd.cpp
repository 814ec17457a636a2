#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "ingarch/model.hpp"
#include "ingarch/simd/kernels.hpp"

using namespace ingarch;

namespace {

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& a : v) a = u(g);
  return v;
}

// Relative agreement scaled by the sum of absolute terms, the natural bound for reassociation.
void check_close(double a, double b, double magnitude) { CHECK(std::abs(a - b) <= 1e-13 * (magnitude + 1.0)); }

}  // namespace

TEST_CASE("scalar kernels against plain loops") {
  const simd::KernelTable& s = simd::scalar_kernels();
  const std::vector<double> a{1, 2, 3, 4, 5};
  CHECK(s.lagged_dot(a.data(), 5, 0) == 55.0);
  CHECK(s.lagged_dot(a.data(), 5, 2) == 1 * 3 + 2 * 4 + 3 * 5);
  CHECK(s.lagged_dot(a.data(), 5, 5) == 0.0);
  double weighted = 0.0;
  CHECK(s.weighted_sum(a.data(), a.data(), 5, &weighted) == 15.0);
  CHECK(weighted == 55.0);
  const std::vector<double> x{2, 0}, ll{std::log(3.0), 0.0}, l{3.0, 1.0}, lf{std::log(2.0), 0.0};
  CHECK(s.poisson_loglik(x.data(), ll.data(), l.data(), lf.data(), 2) ==
        doctest::Approx(2 * std::log(3.0) - 3 - std::log(2.0) - 1));
  const std::vector<double> c0{1, 1}, c1{2, 0}, c2{0, 3}, w{0.5, 2.0}, k{1.0, -1.0};
  const simd::Gram3 g = s.gram3(c0.data(), c1.data(), c2.data(), w.data(), k.data(), 2);
  CHECK(g.s00 == 2.5);
  CHECK(g.s01 == 1.0);
  CHECK(g.s12 == 0.0);
  CHECK(g.s22 == 18.0);
  CHECK(g.r0 == 0.0);
  CHECK(g.r1 == 2.0);
  CHECK(g.r2 == -3.0);
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  const simd::KernelTable* v = simd::avx2_kernels();
  if (!v || !simd::cpu_has_avx2()) {
    MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
    return;
  }
  const simd::KernelTable& s = simd::scalar_kernels();
  // Lengths straddle the vector width and unroll factor.
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 33u, 1000u, 100003u}) {
    CAPTURE(n);
    const auto c0 = uniform(n, -2, 2, 1), c1 = uniform(n, -2, 2, 2), c2 = uniform(n, 0, 5, 3);
    const auto w = uniform(n, 0, 3, 4), k = uniform(n, -4, 4, 5);
    const simd::Gram3 gs = s.gram3(c0.data(), c1.data(), c2.data(), w.data(), k.data(), n);
    const simd::Gram3 gv = v->gram3(c0.data(), c1.data(), c2.data(), w.data(), k.data(), n);
    const double mag = 75.0 * static_cast<double>(n);
    check_close(gs.s00, gv.s00, mag);
    check_close(gs.s01, gv.s01, mag);
    check_close(gs.s02, gv.s02, mag);
    check_close(gs.s11, gv.s11, mag);
    check_close(gs.s12, gv.s12, mag);
    check_close(gs.s22, gv.s22, mag);
    check_close(gs.r0, gv.r0, mag);
    check_close(gs.r1, gv.r1, mag);
    check_close(gs.r2, gv.r2, mag);

    const auto lam = uniform(n, 0.1, 20, 6);
    std::vector<double> x(n), ll(n), lf(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::floor(lam[i]);
      ll[i] = std::log(lam[i]);
      lf[i] = std::lgamma(x[i] + 1);
    }
    check_close(s.poisson_loglik(x.data(), ll.data(), lam.data(), lf.data(), n),
                v->poisson_loglik(x.data(), ll.data(), lam.data(), lf.data(), n), 100.0 * static_cast<double>(n));

    for (std::size_t lag : {0u, 1u, 3u, 4u, 9u}) {
      if (lag > n) continue;
      check_close(s.lagged_dot(c0.data(), n, lag), v->lagged_dot(c0.data(), n, lag), 4.0 * static_cast<double>(n));
    }
    double ws = 0.0, wv = 0.0;
    check_close(s.weighted_sum(w.data(), k.data(), n, &ws), v->weighted_sum(w.data(), k.data(), n, &wv),
                3.0 * static_cast<double>(n));
    check_close(ws, wv, 12.0 * static_cast<double>(n));
  }
}

TEST_CASE("dispatch") {
  const simd::Isa before = simd::active_isa();
  simd::force(simd::Isa::Scalar);
  CHECK(simd::active_isa() == simd::Isa::Scalar);
  CHECK(&simd::active() == &simd::scalar_kernels());
  if (simd::avx2_kernels() && simd::cpu_has_avx2()) {
    simd::force(simd::Isa::Avx2);
    CHECK(simd::active_isa() == simd::Isa::Avx2);
    const CountSeries x = simulate(ModelSpec::log_linear(), {0.3, 0.2, 0.6, 3.0}, 5000, 1);
    const double fast = log_likelihood(ModelSpec::log_linear(), {0.3, 0.2, 0.6, 3.0}, x);
    simd::force(simd::Isa::Scalar);
    const double ref = log_likelihood(ModelSpec::log_linear(), {0.3, 0.2, 0.6, 3.0}, x);
    CHECK(fast == doctest::Approx(ref).epsilon(1e-13));
  }
  simd::force(before);
}
