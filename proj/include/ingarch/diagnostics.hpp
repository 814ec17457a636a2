#pragma once

// Posterior summaries and MCMC convergence diagnostics.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ingarch/mh_sampler.hpp"
#include "ingarch/model.hpp"

namespace ingarch {

struct EssResult {
  double ess = 0.0;
  /// Set for constant input, where ess is reported as 0.
  bool degenerate = false;
};

/// Geyer initial monotone sequence estimator. Requires at least 100 values.
EssResult ess(std::span<const double> chain);

/// Biased-normalization autocorrelations rho_0..rho_max_lag. Throws NumericalError on zero variance.
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

/// Type-7 (linear interpolation) sample quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0, q50 = 0.0, q975 = 0.0;
  double ess = 0.0;
  bool ess_degenerate = false;
  std::vector<double> running_mean;
};

struct PosteriorSummary {
  std::array<ParameterSummary, 4> params;  // alpha0, alpha1, beta1, lambda0
  double acceptance_rate = 0.0;            // theta block
  double acceptance_rate_lambda0 = 0.0;
  std::size_t kept = 0;
};

inline constexpr std::array<const char*, 4> kParamNames{"alpha0", "alpha1", "beta1", "lambda0"};

/// Column j of the post-burn-in draws.
std::vector<double> chain_column(const ChainResult& chain, std::size_t j, std::size_t burn_in);

/// Throws ConfigError unless burn_in < number of draws. ESS is computed when at least 100 draws remain.
PosteriorSummary posterior_summary(const ChainResult& chain, std::size_t burn_in);

/// (x_t - lambda_t) / sqrt(lambda_t), t = 1..n.
std::vector<double> pearson_residuals(const ModelSpec& spec, const ParamVector& params, const CountSeries& x);

/// Gaussian-kernel density on an even grid spanning the data (Silverman bandwidth).
struct DensityGrid {
  std::vector<double> x, density;
};
DensityGrid kernel_density(std::span<const double> values, std::size_t points = 200);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
};
Histogram histogram(std::span<const double> values, std::size_t bins = 30);

}  // namespace ingarch
