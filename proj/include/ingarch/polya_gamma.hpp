#pragma once

// Polya-Gamma PG(b, c) utilities: closed-form moments, samplers for integer and
// real shape, and a Monte-Carlo check of the Laplace-transform identity
//
//   (e^psi)^a / (1 + e^psi)^b = 2^{-b} e^{kappa psi} E[exp(-omega psi^2 / 2)],
//   omega ~ PG(b, 0),  kappa = a - b/2.

#include <cstddef>

#include "ingarch/rng.hpp"

namespace ingarch::pg {

/// E[PG(b, c)] = b / (2c) * tanh(c / 2), with the limit b / 4 at c = 0.
double mean(double b, double c);

/// Var[PG(b, c)] = b / (4 c^3) * (sinh c - c) * sech^2(c / 2), limit b / 24 at c = 0.
double variance(double b, double c);

/// Iteration cap of the PG(1, c) accept-reject loop.
inline constexpr long kMaxRejections = 1'000'000;
/// Truncation point of the alternating-series sampler.
inline constexpr double kTruncation = 0.64;
/// Default number of gamma terms in the series sampler for real shape.
inline constexpr int kSeriesTerms = 200;

/// One PG(1, c) draw (alternating-series accept-reject with an
/// exponential / truncated inverse-Gaussian mixture proposal).
/// Throws NumericalError when kMaxRejections proposals are rejected.
double sample_pg1(double c, Rng& rng);

/// PG(b, c) draw. Integer b: sum of b PG(1, c) draws. Otherwise the series
/// (1 / 2 pi^2) sum_{k <= K} g_k / ((k - 1/2)^2 + c^2 / (4 pi^2)), g_k ~ Gamma(b, 1),
/// plus the exact mean of the dropped terms.
double sample(double b, double c, Rng& rng, int series_terms = kSeriesTerms);

struct LaplaceCheck {
  double lhs = 0;     // closed form
  double rhs = 0;     // Monte-Carlo estimate of the mixture side
  double rhs_se = 0;  // its standard error
};

LaplaceCheck laplace_lhs_rhs(double a, double b, double psi, Rng& rng, std::size_t draws = 100'000);

}  // namespace ingarch::pg
