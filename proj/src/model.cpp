#include "ingarch/model.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "ingarch/error.hpp"
#include "ingarch/rng.hpp"
#include "ingarch/simd/kernels.hpp"

namespace ingarch {

std::string to_string(Link link) { return link == Link::LogLinear ? "loglinear" : "softplus"; }

Link parse_link(const std::string& name) {
  if (name == "loglinear" || name == "log-linear" || name == "log_linear") return Link::LogLinear;
  if (name == "softplus") return Link::Softplus;
  throw ConfigError("unknown link '" + name + "' (expected loglinear or softplus)");
}

void ModelSpec::validate() const {
  if (link == Link::Softplus && !(softplus_scale > 0.0 && std::isfinite(softplus_scale)))
    throw ConfigError("softplus_scale must be positive, got " + std::to_string(softplus_scale));
}

namespace {

constexpr std::size_t kFactorialTable = 1024;

const std::array<double, kFactorialTable>& factorial_table() {
  static const auto table = [] {
    std::array<double, kFactorialTable> t{};
    long double acc = 0.0L;
    t[0] = 0.0;
    for (std::size_t k = 1; k < kFactorialTable; ++k) {
      acc += std::log(static_cast<long double>(k));
      t[k] = static_cast<double>(acc);
    }
    return t;
  }();
  return table;
}

}  // namespace

double log_factorial(std::int64_t k) {
  if (k < 0) throw DataError("log_factorial of negative argument");
  if (static_cast<std::uint64_t>(k) < kFactorialTable) return factorial_table()[k];
  // Stirling series for log Gamma(k + 1); the truncation error at k >= 1024 is below 1e-20.
  const double n = static_cast<double>(k);
  const double inv = 1.0 / n, inv2 = inv * inv;
  const double series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)));
  return n * std::log(n) - n + 0.5 * std::log(2.0 * M_PI * n) + series;
}

CountSeries::CountSeries(std::vector<std::int64_t> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("count series is empty");
  xd_.reserve(values_.size());
  log1p_.reserve(values_.size());
  log_fact_.reserve(values_.size());
  for (std::size_t t = 0; t < values_.size(); ++t) {
    const auto v = values_[t];
    if (v < 0) throw DataError("negative count " + std::to_string(v) + " at index " + std::to_string(t));
    xd_.push_back(static_cast<double>(v));
    log1p_.push_back(std::log1p(static_cast<double>(v)));
    log_fact_.push_back(log_factorial(v));
  }
}

double CountSeries::mean() const {
  return std::accumulate(xd_.begin(), xd_.end(), 0.0) / static_cast<double>(xd_.size());
}

double softplus(double x, double c) {
  const double y = x / c;
  if (y > 0.0) return c * (y + std::log1p(std::exp(-y)));
  return c * std::log1p(std::exp(y));
}

double softplus_derivative(double x, double c) {
  const double y = x / c;
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

IntensityPath intensity_path(const ModelSpec& spec, const ParamVector& p, const CountSeries& x) {
  if (!(p.lambda0 > 0.0) || !std::isfinite(p.lambda0))
    throw ConfigError("lambda0 must be positive and finite");
  const std::size_t n = x.n();
  IntensityPath path;
  path.lambda.resize(n);
  path.log_lambda.resize(n);
  path.eta.resize(n);
  const auto xd = x.as_double();

  if (spec.link == Link::LogLinear) {
    const auto l1p = x.log1p_counts();
    double nu = std::log(p.lambda0);
    for (std::size_t t = 1; t <= n; ++t) {
      nu = p.alpha0 + p.alpha1 * nu + p.beta1 * l1p[t - 1];
      if (!(std::abs(nu) <= kMaxLogIntensity))
        throw IntensityOverflow(t, "log-intensity " + std::to_string(nu));
      path.eta[t - 1] = nu;
      path.log_lambda[t - 1] = nu;
      path.lambda[t - 1] = std::exp(nu);
    }
  } else {
    const double c = spec.softplus_scale;
    double lambda = p.lambda0;
    for (std::size_t t = 1; t <= n; ++t) {
      const double eta = p.alpha0 + p.alpha1 * lambda + p.beta1 * xd[t - 1];
      lambda = softplus(eta, c);
      if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw IntensityOverflow(t, "intensity " + std::to_string(lambda));
      path.eta[t - 1] = eta;
      path.lambda[t - 1] = lambda;
      path.log_lambda[t - 1] = std::log(lambda);
    }
  }
  return path;
}

double log_likelihood(const IntensityPath& path, const CountSeries& x) {
  const std::size_t n = path.size();
  if (n == 0) return 0.0;
  return simd::poisson_loglik(x.as_double().subspan(1, n), path.log_lambda, path.lambda,
                              x.log_factorials().subspan(1, n));
}

double log_likelihood(const ModelSpec& spec, const ParamVector& params, const CountSeries& x) {
  return log_likelihood(intensity_path(spec, params, x), x);
}

bool check_stationarity(const ModelSpec& spec, const Eigen::Vector3d& theta) {
  const double a0 = theta[0], a1 = theta[1], b1 = theta[2];
  if (!theta.allFinite()) return false;
  if (spec.link == Link::Softplus) return a0 > 0.0 && a1 >= 0.0 && b1 >= 0.0 && a1 + b1 < 1.0;
  if (!(std::abs(a1) < 1.0)) return false;
  // b1 == 0 is the seam between the two branches; both branch conditions hold there.
  if (b1 >= 0.0) return std::abs(a1 + b1) < 1.0;
  return std::abs(a1) * std::abs(a1 + b1) < 1.0;
}

CountSeries simulate(const ModelSpec& spec, const ParamVector& p, std::size_t n,
                     std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw ConfigError("simulate requires n >= 1");
  if (!check_stationarity(spec, p)) throw ConfigError("parameters are outside the stationarity region");
  if (!(p.lambda0 > 0.0)) throw ConfigError("lambda0 must be positive");

  Rng rng = make_rng(seed);
  auto draw = [&rng](double lambda) {
    std::poisson_distribution<std::int64_t> pois(lambda);
    return pois(rng);
  };

  std::vector<std::int64_t> xs(n + 1);
  xs[0] = draw(p.lambda0);
  double state = spec.link == Link::LogLinear ? std::log(p.lambda0) : p.lambda0;
  for (std::size_t t = 1; t <= n; ++t) {
    const double prev = static_cast<double>(xs[t - 1]);
    double lambda;
    if (spec.link == Link::LogLinear) {
      state = p.alpha0 + p.alpha1 * state + p.beta1 * std::log1p(prev);
      if (!(std::abs(state) <= kMaxLogIntensity)) throw IntensityOverflow(t, "simulation diverged");
      lambda = std::exp(state);
    } else {
      state = softplus(p.alpha0 + p.alpha1 * state + p.beta1 * prev, spec.softplus_scale);
      lambda = state;
    }
    xs[t] = draw(lambda);
  }
  return CountSeries(std::move(xs));
}

}  // namespace ingarch
