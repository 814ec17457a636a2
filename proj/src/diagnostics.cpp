#include "ingarch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ingarch/error.hpp"
#include "ingarch/simd/kernels.hpp"

namespace ingarch {
namespace {

std::vector<double> centered(std::span<const double> v, double& variance) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  std::vector<double> c(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = v[i] - mean;
  variance = simd::lagged_dot(c, 0) / n;
  return c;
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

}  // namespace

EssResult ess(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 100) throw ConfigError("ess: need at least 100 values");
  EssResult out;
  if (is_constant(chain)) {
    out.degenerate = true;
    return out;
  }
  double var;
  const std::vector<double> c = centered(chain, var);
  const double nd = static_cast<double>(n);
  auto rho = [&](std::size_t lag) { return simd::lagged_dot(c, lag) / nd / var; };

  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = rho(2 * m) + rho(2 * m + 1);
    if (!(pair > 0.0)) break;
    pair = std::min(pair, prev_pair);  // initial monotone sequence
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  // Antithetic chains can give tau < 1; ESS is capped at the chain length.
  tau = std::max(tau, 1.0);
  out.ess = nd / tau;
  return out;
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  if (max_lag >= series.size()) throw ConfigError("acf: max_lag must be smaller than the series length");
  double var;
  const std::vector<double> c = centered(series, var);
  if (!(var > 0.0)) throw NumericalError("acf: series has zero variance");
  const double n = static_cast<double>(series.size());
  std::vector<double> out(max_lag + 1);
  out[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) out[k] = simd::lagged_dot(c, k) / n / var;
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ConfigError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> chain_column(const ChainResult& chain, std::size_t j, std::size_t burn_in) {
  std::vector<double> v;
  v.reserve(chain.size() - std::min(burn_in, chain.size()));
  for (std::size_t i = burn_in; i < chain.size(); ++i) {
    const ParamVector& p = chain.draws[i];
    v.push_back(j == 0 ? p.alpha0 : j == 1 ? p.alpha1 : j == 2 ? p.beta1 : p.lambda0);
  }
  return v;
}

PosteriorSummary posterior_summary(const ChainResult& chain, std::size_t burn_in) {
  if (burn_in >= chain.size()) throw ConfigError("posterior_summary: burn_in must be smaller than the chain length");
  PosteriorSummary s;
  s.kept = chain.size() - burn_in;
  for (std::size_t j = 0; j < 4; ++j) {
    ParameterSummary& ps = s.params[j];
    ps.name = kParamNames[j];
    std::vector<double> v = chain_column(chain, j, burn_in);
    const double n = static_cast<double>(v.size());
    ps.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : v) ss += (a - ps.mean) * (a - ps.mean);
    ps.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    ps.running_mean.resize(v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      acc += v[i];
      ps.running_mean[i] = acc / static_cast<double>(i + 1);
    }
    if (v.size() >= 100) {
      const EssResult e = ess(v);
      ps.ess = e.ess;
      ps.ess_degenerate = e.degenerate;
    }
    std::sort(v.begin(), v.end());
    ps.q025 = quantile_sorted(v, 0.025);
    ps.q50 = quantile_sorted(v, 0.5);
    ps.q975 = quantile_sorted(v, 0.975);
  }
  s.acceptance_rate = chain.acceptance_rate_theta(false);
  s.acceptance_rate_lambda0 = chain.acceptance_rate_lambda0(false);
  if (burn_in > 0) {
    ChainResult tail;
    tail.accepted_theta.assign(chain.accepted_theta.begin() + burn_in, chain.accepted_theta.end());
    tail.accepted_lambda0.assign(chain.accepted_lambda0.begin() + burn_in, chain.accepted_lambda0.end());
    s.acceptance_rate = tail.acceptance_rate_theta(false);
    s.acceptance_rate_lambda0 = tail.acceptance_rate_lambda0(false);
  }
  return s;
}

std::vector<double> pearson_residuals(const ModelSpec& spec, const ParamVector& params, const CountSeries& x) {
  const IntensityPath path = intensity_path(spec, params, x);
  const auto xd = x.as_double();
  std::vector<double> a(path.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = (xd[i + 1] - path.lambda[i]) / std::sqrt(path.lambda[i]);
  return a;
}

DensityGrid kernel_density(std::span<const double> values, std::size_t points) {
  if (values.empty() || points < 2) throw ConfigError("kernel_density: need data and at least two grid points");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / std::max(n - 1.0, 1.0));
  const double bw = sd > 0.0 ? 1.06 * sd * std::pow(n, -0.2) : 1e-3 * std::max(1.0, std::abs(mean));
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - 3.0 * bw, hi = *mx + 3.0 * bw;
  DensityGrid g;
  g.x.resize(points);
  g.density.assign(points, 0.0);
  const double norm = 1.0 / (n * bw * std::sqrt(2.0 * M_PI));
  for (std::size_t i = 0; i < points; ++i) {
    g.x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    double s = 0.0;
    for (double v : values) {
      const double z = (g.x[i] - v) / bw;
      s += std::exp(-0.5 * z * z);
    }
    g.density[i] = s * norm;
  }
  return g;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty() || bins == 0) throw ConfigError("histogram: need data and at least one bin");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn, hi = *mx;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i < bins; ++i) h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.edges[bins] = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

}  // namespace ingarch
