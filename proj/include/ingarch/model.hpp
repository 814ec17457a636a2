#pragma once

// Poisson INGARCH(1,1) models under the log-linear and softplus links.
//
//   log-linear:  nu_t     = a0 + a1 * nu_{t-1} + b1 * log(1 + X_{t-1}),  lambda_t = exp(nu_t)
//   softplus:    lambda_t = s_c(a0 + a1 * lambda_{t-1} + b1 * X_{t-1}),   s_c(x) = c log(1 + e^{x/c})
//
// with X_t | F_{t-1} ~ Poisson(lambda_t). The series carries X_0 explicitly and lambda_0 is a
// parameter, so a series of n + 1 counts has n modeled terms.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ingarch {

enum class Link { LogLinear, Softplus };

std::string to_string(Link link);
Link parse_link(const std::string& name);

struct ModelSpec {
  Link link = Link::LogLinear;
  double softplus_scale = 1.0;  // c, only used by Link::Softplus

  static ModelSpec log_linear() { return {Link::LogLinear, 1.0}; }
  static ModelSpec softplus(double c = 1.0) { return {Link::Softplus, c}; }

  /// Throws ConfigError when softplus_scale is not a positive finite number.
  void validate() const;
};

struct ParamVector {
  double alpha0 = 0.1;
  double alpha1 = 0.1;
  double beta1 = 0.1;
  double lambda0 = 1.0;

  Eigen::Vector3d theta() const { return {alpha0, alpha1, beta1}; }
  static ParamVector from_theta(const Eigen::Vector3d& theta, double lambda0) {
    return {theta[0], theta[1], theta[2], lambda0};
  }
  bool operator==(const ParamVector&) const = default;
};

/// Observed counts X_0..X_n, with per-element transforms cached at construction.
class CountSeries {
 public:
  CountSeries() = default;
  /// Throws DataError on negative entries or an empty sequence.
  explicit CountSeries(std::vector<std::int64_t> values);

  /// Number of modeled terms (X_1..X_n).
  std::size_t n() const { return values_.empty() ? 0 : values_.size() - 1; }
  std::size_t size() const { return values_.size(); }
  std::int64_t operator[](std::size_t t) const { return values_[t]; }
  std::span<const std::int64_t> values() const { return values_; }

  /// X_t as double, t = 0..n.
  std::span<const double> as_double() const { return xd_; }
  /// log(1 + X_t), t = 0..n.
  std::span<const double> log1p_counts() const { return log1p_; }
  /// log(X_t!), t = 0..n.
  std::span<const double> log_factorials() const { return log_fact_; }

  double mean() const;

 private:
  std::vector<std::int64_t> values_;
  std::vector<double> xd_, log1p_, log_fact_;
};

/// Intensity path for t = 1..n, stored zero-based (element i is time i + 1).
struct IntensityPath {
  std::vector<double> lambda;
  std::vector<double> log_lambda;
  /// Linear predictor: nu_t for the log-linear link, eta_t for softplus.
  std::vector<double> eta;

  std::size_t size() const { return lambda.size(); }
};

/// log(k!) accurate to a few ulps for all k >= 0.
double log_factorial(std::int64_t k);

double softplus(double x, double c);
/// d/dx s_c(x) = logistic(x / c).
double softplus_derivative(double x, double c);

/// Largest |nu_t| accepted before the recursion is declared to have overflowed.
inline constexpr double kMaxLogIntensity = 700.0;

/// Throws IntensityOverflow naming the first offending index.
IntensityPath intensity_path(const ModelSpec& spec, const ParamVector& params,
                             const CountSeries& x);

/// sum_t [x_t log(lambda_t) - lambda_t - log(x_t!)], t = 1..n.
double log_likelihood(const ModelSpec& spec, const ParamVector& params, const CountSeries& x);
double log_likelihood(const IntensityPath& path, const CountSeries& x);

bool check_stationarity(const ModelSpec& spec, const Eigen::Vector3d& theta);
inline bool check_stationarity(const ModelSpec& spec, const ParamVector& params) {
  return check_stationarity(spec, params.theta());
}

/// Draws X_0 ~ Poisson(lambda_0) followed by n recursion steps; returns n + 1 counts.
/// Throws ConfigError for non-stationary parameters or n == 0.
CountSeries simulate(const ModelSpec& spec, const ParamVector& params, std::size_t n,
                     std::uint64_t seed);

}  // namespace ingarch
