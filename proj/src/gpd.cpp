#include "ingarch/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ingarch {
namespace {

// Profile log-likelihood per observation at theta = -k / sigma, where k(theta) = mean(log1p(-theta y)).
double profile_loglik(double theta, std::span<const double> y, double& k_out) {
  double s = 0.0;
  for (double v : y) s += std::log1p(-theta * v);
  const double k = s / static_cast<double>(y.size());
  k_out = k;
  // -theta / k is 1 / sigma; theta and k have opposite signs on the valid range.
  return std::log(-theta / k) - k - 1.0;
}

double clamp_xstar(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  const std::size_t idx = static_cast<std::size_t>(std::floor(n / 4.0 + 0.5));
  double xstar = sorted[idx == 0 ? 0 : idx - 1];
  if (xstar > 0.0) return xstar;
  // Many exact zeros at the bottom; use the smallest positive exceedance instead.
  for (double v : sorted)
    if (v > 0.0) return v;
  return 1.0;
}

GpdFit fit_profile(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  const double nd = static_cast<double>(n);
  const std::size_t grid = 30 + static_cast<std::size_t>(std::floor(std::sqrt(nd)));
  const double xstar = clamp_xstar(sorted);
  const double ymax = sorted.back();
  constexpr double kPrior = 3.0;

  std::vector<double> theta(grid), lx(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    const double jj = static_cast<double>(j + 1);
    theta[j] = 1.0 / ymax + (1.0 - std::sqrt(static_cast<double>(grid) / (jj - 0.5))) / kPrior / xstar;
    double k;
    lx[j] = nd * profile_loglik(theta[j], sorted, k);
  }
  // Posterior weights w_j = 1 / sum_i exp(l_i - l_j), evaluated stably.
  const double lmax = *std::max_element(lx.begin(), lx.end());
  double z = 0.0;
  for (double l : lx) z += std::exp(l - lmax);
  double theta_hat = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    const double w = std::exp(lx[j] - lmax) / z;
    if (std::isfinite(w)) theta_hat += theta[j] * w;
  }
  double s = 0.0;
  for (double v : sorted) s += std::log1p(-theta_hat * v);
  double k = s / nd;
  GpdFit fit;
  fit.sigma_hat = -k / theta_hat;
  // Weakly informative prior: shrink toward 0.5 with 10 pseudo-observations.
  constexpr double a = 10.0;
  k = k * nd / (nd + a) + a * 0.5 / (nd + a);
  fit.k_hat = std::isnan(k) ? std::numeric_limits<double>::infinity() : k;
  fit.m = n;
  return fit;
}

GpdFit fit_ml(std::span<const double> sorted) {
  const double nd = static_cast<double>(sorted.size());
  const double ymax = sorted.back();
  const double ybar = std::accumulate(sorted.begin(), sorted.end(), 0.0) / nd;
  // theta ranges over (-inf, 1 / ymax): t -> 1 approaches 1 / ymax, t -> 0 approaches -inf.
  auto theta_of = [&](double t) {
    const double hi = 1.0 / ymax;
    return hi - (1.0 / t - 1.0) / ybar;
  };
  auto objective = [&](double t) {
    const double th = theta_of(t);
    if (std::abs(th) < 1e-14 * (1.0 / ybar)) return -std::log(ybar) - 1.0;  // exponential limit
    double k;
    const double l = profile_loglik(th, sorted, k);
    return std::isfinite(l) ? l : -std::numeric_limits<double>::infinity();
  };

  constexpr int kGrid = 400;
  int best = 1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 1; i < kGrid; ++i) {
    const double v = objective(static_cast<double>(i) / kGrid);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section refinement on the bracketing cells.
  double a = static_cast<double>(best - 1) / kGrid, b = static_cast<double>(best + 1) / kGrid;
  a = std::max(a, 1e-9);
  b = std::min(b, 1.0 - 1e-12);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = objective(d);
    }
  }
  const double th = theta_of(0.5 * (a + b));
  GpdFit fit;
  fit.m = sorted.size();
  if (std::abs(th) < 1e-14 / ybar) {
    fit.k_hat = 0.0;
    fit.sigma_hat = ybar;
    return fit;
  }
  double s = 0.0;
  for (double v : sorted) s += std::log1p(-th * v);
  fit.k_hat = s / nd;
  fit.sigma_hat = -fit.k_hat / th;
  return fit;
}

}  // namespace

GpdFit fit_gpd(std::span<const double> exceedances, GpdMethod method) {
  if (exceedances.size() < 5) throw ConfigError("fit_gpd: need at least 5 exceedances");
  std::vector<double> y(exceedances.begin(), exceedances.end());
  for (double v : y)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("fit_gpd: exceedances must be finite and non-negative");
  std::sort(y.begin(), y.end());
  if (y.back() - y.front() <= 0.0) throw DegenerateTail("fit_gpd: exceedances have zero spread");
  GpdFit fit = method == GpdMethod::Profile ? fit_profile(y) : fit_ml(y);
  if (!(fit.sigma_hat > 0.0) || !std::isfinite(fit.sigma_hat))
    throw DegenerateTail("fit_gpd: non-positive scale estimate");
  return fit;
}

double gpd_quantile(double p, double k, double sigma, double u) {
  const double log_tail = std::log1p(-p);
  if (std::abs(k) < 1e-12) return u - sigma * log_tail;
  return u + sigma / k * std::expm1(-k * log_tail);
}

std::size_t pareto_tail_size(std::size_t s) {
  const double sd = static_cast<double>(s);
  return static_cast<std::size_t>(std::floor(std::min(0.2 * sd, 3.0 * std::sqrt(sd))));
}

double khat_threshold(std::size_t s) {
  if (s < 10) throw ConfigError("khat_threshold: S must be at least 10");
  return std::min(1.0 - 1.0 / std::log10(static_cast<double>(s)), 0.7);
}

SmoothedRatios pareto_smooth(std::span<const double> ratios, GpdMethod method) {
  const std::size_t s = ratios.size();
  if (s < 25) throw ConfigError("pareto_smooth: need at least 25 ratios");
  for (double r : ratios)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("pareto_smooth: ratios must be finite and non-negative");

  SmoothedRatios out;
  out.weights.assign(ratios.begin(), ratios.end());
  const std::size_t m = pareto_tail_size(s);

  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratios[a] < ratios[b]; });
  const double u = ratios[order[s - m - 1]];
  const double rmax = ratios[order[s - 1]];
  std::vector<double> exceed(m);
  for (std::size_t i = 0; i < m; ++i) exceed[i] = ratios[order[s - m + i]] - u;

  try {
    out.gpd = fit_gpd(exceed, method);
  } catch (const DegenerateTail&) {
    out.gpd.location_u = u;
    out.gpd.m = m;
    out.gpd.k_hat = 0.0;
    out.gpd.sigma_hat = 0.0;
    return out;
  }
  out.gpd.location_u = u;
  for (std::size_t z = 1; z <= m; ++z) {
    const double p = (static_cast<double>(z) - 0.5) / static_cast<double>(m);
    const double q = gpd_quantile(p, out.gpd.k_hat, out.gpd.sigma_hat, u);
    out.weights[order[s - m + z - 1]] = std::isfinite(q) ? std::min(q, rmax) : rmax;
  }
  out.smoothed = true;
  return out;
}

}  // namespace ingarch
