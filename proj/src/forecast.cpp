#include "ingarch/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ingarch/error.hpp"

namespace ingarch {

double poisson_log_pmf(double k, double log_lambda, double lambda, double log_k_factorial) {
  return k * log_lambda - lambda - log_k_factorial;
}

ForecastReport forecast_metrics(const ModelSpec& spec, std::span<const ParamVector> draws, const CountSeries& x,
                                const ForecastOptions& options) {
  if (draws.empty()) throw ConfigError("forecast_metrics: no posterior draws");
  if (options.max_draws == 0) throw ConfigError("forecast_metrics: max_draws must be positive");
  const std::size_t n = x.n();
  if (n == 0) throw DataError("forecast_metrics: series has no modeled terms");

  // Even thinning to at most max_draws.
  std::vector<const ParamVector*> used;
  const std::size_t total = draws.size();
  const std::size_t keep = std::min(total, options.max_draws);
  used.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) used.push_back(&draws[i * total / keep]);

  const auto xd = x.as_double();
  const auto lf = x.log_factorials();
  std::vector<double> lambda_sum(n, 0.0);
  // Running log-sum-exp of the per-draw Poisson log pmf at each t.
  std::vector<double> lse_max(n, -std::numeric_limits<double>::infinity()), lse_sum(n, 0.0);
  std::size_t ok = 0;
  for (const ParamVector* p : used) {
    IntensityPath path;
    try {
      path = intensity_path(spec, *p, x);
    } catch (const IntensityOverflow&) {
      continue;
    }
    ++ok;
    for (std::size_t i = 0; i < n; ++i) {
      lambda_sum[i] += path.lambda[i];
      const double lp = poisson_log_pmf(xd[i + 1], path.log_lambda[i], path.lambda[i], lf[i + 1]);
      if (lp > lse_max[i]) {
        lse_sum[i] = lse_sum[i] * std::exp(lse_max[i] - lp) + 1.0;
        lse_max[i] = lp;
      } else {
        lse_sum[i] += std::exp(lp - lse_max[i]);
      }
    }
  }
  if (ok == 0) throw NumericalError("forecast_metrics: every draw overflowed");

  std::vector<double> m(n);
  if (options.point == PointForecast::Plugin) {
    ParamVector mean{0, 0, 0, 0};
    for (const ParamVector* p : used) {
      mean.alpha0 += p->alpha0;
      mean.alpha1 += p->alpha1;
      mean.beta1 += p->beta1;
      mean.lambda0 += p->lambda0;
    }
    const double k = static_cast<double>(used.size());
    mean = {mean.alpha0 / k, mean.alpha1 / k, mean.beta1 / k, mean.lambda0 / k};
    const IntensityPath path = intensity_path(spec, mean, x);
    m = path.lambda;
  } else {
    for (std::size_t i = 0; i < n; ++i) m[i] = lambda_sum[i] / static_cast<double>(ok);
  }

  ForecastReport r;
  r.draws_used = ok;
  double abs_sum = 0.0, sq_sum = 0.0;
  const double log_ok = std::log(static_cast<double>(ok));
  for (std::size_t i = 0; i < n; ++i) {
    const double e = xd[i + 1] - m[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    r.lpd += lse_max[i] + std::log(lse_sum[i]) - log_ok;
  }
  r.mae = abs_sum / static_cast<double>(n);
  r.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  return r;
}

}  // namespace ingarch
