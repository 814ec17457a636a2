#include "ingarch/nb_approx.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ingarch/error.hpp"

namespace ingarch {
namespace {

// log(1 + y) / y - 1, accurate for small y.
double log1p_ratio_minus_one(double y) {
  if (y < 0.5) {
    // -y/2 + y^2/3 - y^3/4 + ...; the closed form cancels badly below 0.5.
    double sum = 0.0, power = y;
    for (int k = 2; k <= 60; ++k) {
      sum += ((k % 2 == 0) ? -1.0 : 1.0) * power / k;
      power *= y;
    }
    return sum;
  }
  return std::log1p(y) / y - 1.0;
}

// log(1 + y) - y / (1 + y), accurate for small y.
double log1p_minus_ratio(double y) {
  if (y < 0.5) {
    double sum = 0.0, power = y * y;
    for (int k = 2; k <= 60; ++k) {
      sum += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1.0) / k * power;
      power *= y;
    }
    return sum;
  }
  return std::log1p(y) - y / (1.0 + y);
}

// log of the Poisson/NB mass ratio at zero: -lambda + r log(1 + lambda / r) <= 0.
double log_zero_ratio(double lambda, double r) { return lambda * log1p_ratio_minus_one(lambda / r); }

}  // namespace

double discrepancy(double lambda, double r) { return -std::expm1(log_zero_ratio(lambda, r)); }

double select_r(double lambda, double d_max) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("select_r: lambda must be positive");
  if (!(d_max > 0.0 && d_max < 1.0)) throw ConfigError("select_r: tolerance must lie in (0, 1)");

  // Work in y = lambda / r: feasibility is g(y) >= c with g(y) = log(1+y)/y - 1 decreasing.
  // The bracket is r >= lambda / 10; below that every r may be feasible, so the bound is returned.
  constexpr double kMaxRatio = 10.0;
  const double c = std::log1p(-d_max) / lambda;
  auto g = [](double y) { return log1p_ratio_minus_one(y); };
  if (g(kMaxRatio) >= c) return lambda / kMaxRatio;

  // Safeguarded Newton; the small-y expansion g(y) ~ -y/2 gives the start.
  double lo = 0.0, hi = kMaxRatio;
  double y = std::min(-2.0 * c, 0.5 * kMaxRatio);
  for (int it = 0; it < 200; ++it) {
    const double f = g(y) - c;
    if (f == 0.0) break;
    if (f > 0.0)
      lo = y;
    else
      hi = y;
    const double slope = -log1p_minus_ratio(y) / (y * y);
    double next = y - f / slope;
    if (!(slope < 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - y) <= 1e-13 * y || hi - lo <= 1e-13 * hi;
    y = next;
    if (done) break;
  }
  // Rounding can leave the root a hair on the infeasible side; step r up geometrically.
  // The few-ulp margin keeps the exact discrepancy, not just its double evaluation, within d_max.
  const double target = d_max * (1.0 - 32.0 * std::numeric_limits<double>::epsilon());
  double r = lambda / y;
  for (int guard = 0; guard < 64 && discrepancy(lambda, r) > target; ++guard) r *= 1.0 + 1e-16 * std::ldexp(1.0, guard);
  return r;
}

double NbSchedule::mean_r() const {
  if (r.empty()) return 0.0;
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

NbSchedule schedule_from_r(const IntensityPath& path, const CountSeries& x, std::span<const double> r,
                           double d_max) {
  const std::size_t n = path.size();
  if (x.n() != n || r.size() != n)
    throw ConfigError("schedule: intensity path, series and r lengths disagree");
  const auto xd = x.as_double();
  NbSchedule s;
  s.tolerance = d_max;
  s.r.assign(r.begin(), r.end());
  s.log_r.resize(n);
  s.psi.resize(n);
  s.kappa.resize(n);
  s.shape.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.log_r[i] = std::log(s.r[i]);
    s.psi[i] = path.log_lambda[i] - s.log_r[i];
    s.kappa[i] = 0.5 * (xd[i + 1] - s.r[i]);
    s.shape[i] = s.r[i] + xd[i + 1];
  }
  return s;
}

NbSchedule build_schedule(const IntensityPath& path, const CountSeries& x, double d_max) {
  if (x.n() != path.size()) throw ConfigError("schedule: intensity path and series lengths disagree");
  std::vector<double> r(path.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = select_r(path.lambda[i], d_max);
  return schedule_from_r(path, x, r, d_max);
}

double nb_log_likelihood(const IntensityPath& path, const CountSeries& x, std::span<const double> r) {
  const auto xd = x.as_double();
  const auto lf = x.log_factorials();
  double s = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double xt = xd[i + 1], rt = r[i], lam = path.lambda[i];
    const double log_p = -std::log1p(lam / rt);  // log(r / (r + lambda))
    const double log_q = std::log(lam) - std::log(rt + lam);
    s += std::lgamma(rt + xt) - std::lgamma(rt) - lf[i + 1] + rt * log_p + xt * log_q;
  }
  return s;
}

}  // namespace ingarch
