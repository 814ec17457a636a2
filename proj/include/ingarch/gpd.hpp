#pragma once

// Generalized Pareto tail fitting and Pareto smoothing of importance ratios.
//
// Parameterization: F(y) = 1 - (1 + k y / sigma)^(-1/k), with the exponential
// distribution as the k = 0 limit. Positive k means a heavy tail.

#include <cstddef>
#include <span>
#include <vector>

#include "ingarch/error.hpp"

namespace ingarch {

struct GpdFit {
  double k_hat = 0.0;
  double sigma_hat = 1.0;
  double location_u = 0.0;
  std::size_t m = 0;
};

enum class GpdMethod {
  /// Zhang-Stephens profile-posterior estimator with the weak prior pulling k toward 0.5.
  Profile,
  /// Profile maximum likelihood over theta = -k / sigma.
  MaximumLikelihood,
};

/// Raised when the exceedances carry no spread.
class DegenerateTail : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Fit (k, sigma) to non-negative exceedances. Requires at least 5 values; location is left at 0.
GpdFit fit_gpd(std::span<const double> exceedances, GpdMethod method = GpdMethod::Profile);

/// Inverse CDF at p in [0, 1).
double gpd_quantile(double p, double k, double sigma, double u = 0.0);

/// floor(min(0.2 S, 3 sqrt(S)))
std::size_t pareto_tail_size(std::size_t s);

/// min(1 - 1 / log10(S), 0.7). Throws ConfigError for S < 10.
double khat_threshold(std::size_t s);

struct SmoothedRatios {
  /// Same order as the input; not normalized.
  std::vector<double> weights;
  GpdFit gpd;
  /// False when the tail was degenerate and the ratios were passed through unchanged.
  bool smoothed = false;
};

/// Replace the largest M ratios with GPD quantiles at (z - 1/2) / M, capped at the largest raw ratio.
/// Throws ConfigError for S < 25 or negative / non-finite ratios.
SmoothedRatios pareto_smooth(std::span<const double> ratios, GpdMethod method = GpdMethod::Profile);

}  // namespace ingarch
