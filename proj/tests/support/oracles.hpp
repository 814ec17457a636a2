#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's numerical code paths.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using hp = boost::multiprecision::cpp_bin_float_50;

inline hp hp_softplus(const hp& x, const hp& c) { return c * boost::multiprecision::log1p(boost::multiprecision::exp(x / c)); }

/// 1 - e^{-lambda} (1 + lambda / r)^r in 50-digit arithmetic.
inline hp hp_discrepancy(const hp& lambda, const hp& r) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log1p;
  return 1 - exp(-lambda + r * log1p(lambda / r));
}

/// max_{x <= x_max} |F_Poi(x) / F_NB(x) - 1| by term-by-term CDF summation.
inline hp hp_cdf_ratio_gap(const hp& lambda, const hp& r, int x_max) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  hp p_pois = exp(-lambda);                    // P(X = 0)
  hp p_nb = exp(r * log(r / (r + lambda)));    // P(V = 0)
  const hp q = lambda / (r + lambda);
  hp f_pois = 0, f_nb = 0, gap = 0;
  for (int x = 0; x <= x_max; ++x) {
    f_pois += p_pois;
    f_nb += p_nb;
    hp g = f_pois / f_nb - 1;
    if (g < 0) g = -g;
    if (g > gap) gap = g;
    p_pois *= lambda / (x + 1);
    p_nb *= (r + x) / (x + 1) * q;
  }
  return gap;
}

/// Plain double-precision intensity recursion written out from the model definition.
inline std::vector<double> intensities(bool softplus_link, double c, double a0, double a1, double b1, double lambda0,
                                       const std::vector<std::int64_t>& x) {
  std::vector<double> lam;
  double state = softplus_link ? lambda0 : std::log(lambda0);
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double prev = static_cast<double>(x[t - 1]);
    if (softplus_link) {
      const double eta = a0 + a1 * state + b1 * prev;
      state = c * std::log1p(std::exp(eta / c));
      lam.push_back(state);
    } else {
      state = a0 + a1 * state + b1 * std::log(1.0 + prev);
      lam.push_back(std::exp(state));
    }
  }
  return lam;
}

/// Softplus log-intensities log lambda_1..n in 50 digits, so finite differences carry no rounding noise.
inline std::vector<hp> hp_softplus_log_path(const hp& c, const hp& a0, const hp& a1, const hp& b1, const hp& lambda0,
                                            const std::vector<std::int64_t>& x) {
  std::vector<hp> out;
  hp state = lambda0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    state = hp_softplus(a0 + a1 * state + b1 * hp(x[t - 1]), c);
    out.push_back(boost::multiprecision::log(state));
  }
  return out;
}

inline double poisson_loglik(const std::vector<double>& lam, const std::vector<std::int64_t>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    const double k = static_cast<double>(x[i + 1]);
    s += k * std::log(lam[i]) - lam[i] - std::lgamma(k + 1.0);
  }
  return s;
}

/// Log-linear stationarity region written from its two branches; beta1 = 0 belongs to both.
inline bool loglinear_stationary(double a1, double b1) {
  if (!(std::abs(a1) < 1.0)) return false;
  if (b1 >= 0.0) return std::abs(a1 + b1) < 1.0;
  return std::abs(a1) * std::abs(a1 + b1) < 1.0;
}

/// Draws from GPD(k, sigma) by inversion.
inline std::vector<double> gpd_sample(double k, double sigma, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& y : out) {
    const double v = 1.0 - u(rng);  // (0, 1]
    y = std::abs(k) < 1e-12 ? -sigma * std::log(v) : sigma * (std::pow(v, -k) - 1.0) / k;
  }
  return out;
}

/// Posterior means of theta on an m^3 midpoint grid spanning mean +- 5 sd of a diagonal Gaussian
/// prior, log-linear link, lambda0 fixed, restricted to the stationarity region.
inline std::array<double, 3> grid_posterior_mean(const std::vector<std::int64_t>& x, double lambda0,
                                                 const std::array<double, 3>& b, double sd, int m) {
  std::vector<double> logw;
  std::vector<std::array<double, 3>> pts;
  logw.reserve(static_cast<std::size_t>(m) * m * m);
  const double h = 10.0 * sd / m;
  double mx = -INFINITY;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const std::array<double, 3> th{b[0] - 5 * sd + (i + 0.5) * h, b[1] - 5 * sd + (j + 0.5) * h,
                                       b[2] - 5 * sd + (k + 0.5) * h};
        if (!loglinear_stationary(th[1], th[2])) continue;
        double lp = 0.0;
        for (int d = 0; d < 3; ++d) lp -= 0.5 * (th[d] - b[d]) * (th[d] - b[d]) / (sd * sd);
        lp += poisson_loglik(intensities(false, 1.0, th[0], th[1], th[2], lambda0, x), x);
        pts.push_back(th);
        logw.push_back(lp);
        mx = std::max(mx, lp);
      }
  std::array<double, 3> mean{0, 0, 0};
  double z = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double w = std::exp(logw[i] - mx);
    z += w;
    for (int d = 0; d < 3; ++d) mean[d] += w * pts[i][d];
  }
  for (auto& v : mean) v /= z;
  return mean;
}

/// Mean and standard error of a sample.
struct MeanSe {
  double mean = 0.0, se = 0.0;
};
inline MeanSe mean_se(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

}  // namespace oracle
