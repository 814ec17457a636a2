#pragma once

// Negative-binomial stand-in for the Poisson likelihood. Each term uses
// NB(r_t, p_t = r_t / (lambda_t + r_t)); r_t is picked per time point so that the
// Poisson/NB CDF-ratio discrepancy
//
//   d(lambda, r) = 1 - exp(-lambda) * (1 + lambda / r)^r
//
// stays below a common tolerance.

#include <span>
#include <vector>

#include "ingarch/model.hpp"

namespace ingarch {

// The plug-in Polya-Gamma curvature exceeds the Poisson curvature by a factor that grows with r,
// so small tolerances give over-concentrated proposals. 0.2 keeps importance weights light-tailed.
inline constexpr double kDefaultNbTolerance = 0.2;

/// Time-indexed NB parameters, zero-based like IntensityPath (element i is t = i + 1).
struct NbSchedule {
  std::vector<double> r;
  std::vector<double> log_r;
  /// psi_t = log(lambda_t) - log(r_t)
  std::vector<double> psi;
  /// kappa_t = (x_t - r_t) / 2
  std::vector<double> kappa;
  /// r_t + x_t, the Polya-Gamma shape of the latent variable at t
  std::vector<double> shape;
  double tolerance = kDefaultNbTolerance;

  std::size_t size() const { return r.size(); }
  double mean_r() const;
};

/// 1 - exp(-lambda + r log(1 + lambda / r)); lies in [0, 1) and decreases in r.
double discrepancy(double lambda, double r);

/// Smallest r with discrepancy(lambda, r) <= d_max, to ~1e-12 relative precision.
/// Throws ConfigError unless lambda > 0 and 0 < d_max < 1.
double select_r(double lambda, double d_max);

/// Throws ConfigError when path and series lengths disagree.
NbSchedule build_schedule(const IntensityPath& path, const CountSeries& x, double d_max);

/// Same psi/kappa transforms for an externally fixed r (used when the schedule is frozen).
NbSchedule schedule_from_r(const IntensityPath& path, const CountSeries& x, std::span<const double> r,
                           double d_max);

/// sum_t log NB(x_t; r_t, r_t / (r_t + lambda_t)), including all normalizing terms.
double nb_log_likelihood(const IntensityPath& path, const CountSeries& x, std::span<const double> r);

}  // namespace ingarch
