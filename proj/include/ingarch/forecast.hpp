#pragma once

// One-step-ahead point and density forecast scores over a posterior sample.

#include <span>
#include <vector>

#include "ingarch/model.hpp"

namespace ingarch {

struct ForecastReport {
  double mae = 0.0;
  double rmse = 0.0;
  /// sum_t log mean_draws Poisson(x_t; lambda_t(draw))
  double lpd = 0.0;
  std::size_t draws_used = 0;
};

enum class PointForecast {
  /// m_t averaged over draws of lambda_t.
  DrawAverage,
  /// lambda_t at the posterior-mean parameters.
  Plugin,
};

struct ForecastOptions {
  PointForecast point = PointForecast::DrawAverage;
  /// Draws are thinned evenly down to at most this many.
  std::size_t max_draws = 1000;
};

/// Throws ConfigError for an empty sample. Draws whose recursion overflows are skipped;
/// NumericalError if none survive.
ForecastReport forecast_metrics(const ModelSpec& spec, std::span<const ParamVector> draws, const CountSeries& x,
                                const ForecastOptions& options = {});

/// log Poisson(k; lambda)
double poisson_log_pmf(double k, double log_lambda, double lambda, double log_k_factorial);

}  // namespace ingarch
