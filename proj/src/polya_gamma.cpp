#include "ingarch/polya_gamma.hpp"

#include <cmath>
#include <random>

#include "ingarch/error.hpp"

namespace ingarch::pg {
namespace {

constexpr double kPi = M_PI;
constexpr double kPi2 = M_PI * M_PI;

double log_norm_cdf(double x) { return std::log(0.5 * std::erfc(-x / M_SQRT2)); }

// Alternating-series coefficient a_n(x) of the J*(1, 0) density, piecewise at the truncation point.
double series_term(int n, double x) {
  const double k = n + 0.5;
  if (x > kTruncation) return kPi * k * std::exp(-0.5 * k * k * kPi2 * x);
  return std::pow(2.0 / (kPi * x), 1.5) * kPi * k * std::exp(-2.0 * k * k / x);
}

// P(X < t) for X ~ InverseGaussian(mu = 1 / z, shape = 1).
double inverse_gaussian_cdf(double t, double z) {
  const double rt = 1.0 / std::sqrt(t);
  const double lo = (t * z - 1.0) * rt;
  const double hi = -(t * z + 1.0) * rt;
  return std::exp(log_norm_cdf(lo)) + std::exp(2.0 * z + log_norm_cdf(hi));
}

// InverseGaussian(mu = 1 / z, shape = 1) truncated to (0, t).
double truncated_inverse_gaussian(double z, double t, Rng& rng) {
  if (z < 1.0 / t) {
    // Mean beyond the truncation point: inverse-chi-square proposal, exp(-z^2 x / 2) acceptance.
    for (long it = 0; it < kMaxRejections; ++it) {
      double e1, e2;
      do {
        e1 = exponential(rng);
        e2 = exponential(rng);
      } while (e1 * e1 > 2.0 * e2 / t);
      const double denom = 1.0 + t * e1;
      const double x = t / (denom * denom);
      if (uniform_open(rng) <= std::exp(-0.5 * z * z * x)) return x;
    }
  } else {
    const double mu = 1.0 / z;
    for (long it = 0; it < kMaxRejections; ++it) {
      const double n = standard_normal(rng);
      const double y = n * n;
      const double muy = mu * y;
      double x = mu + 0.5 * mu * muy - 0.5 * mu * std::sqrt(4.0 * muy + muy * muy);
      if (uniform_open(rng) > mu / (mu + x)) x = mu * mu / x;
      if (x < t) return x;
    }
  }
  throw NumericalError("Polya-Gamma sampler: truncated inverse-Gaussian draw exceeded the iteration cap");
}

bool is_integer(double b) { return std::abs(b - std::round(b)) < 1e-12; }

}  // namespace

double mean(double b, double c) {
  const double ac = std::abs(c);
  if (ac < 1e-4) return b * (0.25 - c * c / 48.0);
  return b / (2.0 * ac) * std::tanh(0.5 * ac);
}

double variance(double b, double c) {
  const double ac = std::abs(c);
  if (ac < 1e-3) return b * (1.0 / 24.0 - c * c / 120.0);
  // (sinh c - c) sech^2(c/2) rewritten as 2 tanh(c/2) - c sech^2(c/2), finite for large c.
  const double sech = 1.0 / std::cosh(0.5 * ac);
  return b / (4.0 * ac * ac * ac) * (2.0 * std::tanh(0.5 * ac) - ac * sech * sech);
}

double sample_pg1(double c, Rng& rng) {
  // PG(1, c) = J*(1, c / 2) / 4.
  const double z = 0.5 * std::abs(c);
  const double t = kTruncation;
  const double k = 0.125 * kPi2 + 0.5 * z * z;
  const double p = 0.5 * kPi / k * std::exp(-k * t);
  const double q = 2.0 * std::exp(-z) * inverse_gaussian_cdf(t, z);
  const double p_exp = p / (p + q);

  for (long it = 0; it < kMaxRejections; ++it) {
    double x;
    if (uniform_open(rng) < p_exp)
      x = t + exponential(rng) / k;
    else
      x = truncated_inverse_gaussian(z, t, rng);

    double s = series_term(0, x);
    const double y = uniform_open(rng) * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_term(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_term(n, x);
        if (y > s) break;
      }
    }
  }
  throw NumericalError("Polya-Gamma sampler: PG(1, c) accept-reject exceeded the iteration cap");
}

double sample(double b, double c, Rng& rng, int series_terms) {
  if (!(b > 0.0)) throw ConfigError("Polya-Gamma shape must be positive");
  if (is_integer(b)) {
    const long count = std::lround(b);
    double sum = 0.0;
    for (long i = 0; i < count; ++i) sum += sample_pg1(c, rng);
    return sum;
  }
  std::gamma_distribution<double> gamma(b, 1.0);
  const double shift = c * c / (4.0 * kPi2);
  double draw = 0.0, kept_mean = 0.0;
  for (int k = 1; k <= series_terms; ++k) {
    const double h = k - 0.5;
    const double d = h * h + shift;
    draw += gamma(rng) / d;
    kept_mean += b / d;
  }
  const double scale = 1.0 / (2.0 * kPi2);
  const double tail = mean(b, c) - scale * kept_mean;
  return scale * draw + std::max(tail, 0.0);
}

LaplaceCheck laplace_lhs_rhs(double a, double b, double psi, Rng& rng, std::size_t draws) {
  if (!(b > 0.0)) throw ConfigError("Polya-Gamma shape must be positive");
  LaplaceCheck out;
  // log(1 + e^psi) computed stably.
  const double log1pexp = psi > 0 ? psi + std::log1p(std::exp(-psi)) : std::log1p(std::exp(psi));
  out.lhs = std::exp(a * psi - b * log1pexp);

  const double kappa = a - 0.5 * b;
  const double scale = std::exp(-b * M_LN2 + kappa * psi);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double v = std::exp(-0.5 * sample(b, 0.0, rng) * psi * psi);
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / static_cast<double>(draws);
  const double var = std::max(sum2 / static_cast<double>(draws) - m * m, 0.0);
  out.rhs = scale * m;
  out.rhs_se = scale * std::sqrt(var / static_cast<double>(draws));
  return out;
}

}  // namespace ingarch::pg
