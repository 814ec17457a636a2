#pragma once

// Pareto-smoothed adaptive importance sampling for theta with lambda0 held fixed.
//
// Draws come from the state-dependent Gaussian proposal built at an adaptive center,
// which moves only when a draw has strictly higher unnormalized posterior.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ingarch/gpd.hpp"
#include "ingarch/mh_sampler.hpp"

namespace ingarch {

struct PsaisConfig {
  std::size_t draws = 5000;  // S
  std::uint64_t seed = 1;
  double nb_tolerance = kDefaultNbTolerance;
  LinearizationOptions linearization;
  GpdMethod gpd_method = GpdMethod::Profile;
  /// lambda0 for every draw; the MLE value is used when unset.
  std::optional<double> lambda0;
  /// Starting center; the MLE (or (0.1, 0.1, 0.1) when the fit fails) when unset.
  std::optional<Eigen::Vector3d> initial_center;
  /// Store the retained center instead of the draw after a non-uphill move.
  bool overwrite_draws = false;
  double fallback_scale = 0.05;

  void validate() const;
};

/// h(theta) for the self-normalized estimator; the identity when empty.
using Functional = std::function<Eigen::VectorXd(const Eigen::Vector3d&)>;

struct PsaisResult {
  std::vector<Eigen::Vector3d> draws;
  /// Center whose proposal generated each draw.
  std::vector<Eigen::Vector3d> centers;
  /// Unnormalized log posterior of the center in force at each draw.
  std::vector<double> center_log_posterior;
  std::vector<double> log_raw_ratios;
  /// exp(log ratio - max log ratio); zero outside the support.
  std::vector<double> raw_ratios;
  std::vector<double> smoothed_weights;  // normalized
  GpdFit gpd;
  bool tail_smoothed = false;
  double khat_threshold = 0.0;
  bool khat_flag = false;
  Eigen::VectorXd estimate;
  Eigen::VectorXd weighted_se;
  double is_ess = 0.0;
  double lambda0 = 1.0;
  std::size_t fallback_proposals = 0;
};

/// log p(theta, lambda0 | x) - log g(theta); -infinity outside the support.
double log_raw_ratio(const Eigen::Vector3d& theta, const GaussianProposal& proposal, const ModelSpec& spec,
                     const PriorSpec& prior, const CountSeries& x, double lambda0);

inline double raw_ratio(const Eigen::Vector3d& theta, const GaussianProposal& proposal, const ModelSpec& spec,
                        const PriorSpec& prior, const CountSeries& x, double lambda0) {
  return std::exp(log_raw_ratio(theta, proposal, spec, prior, x, lambda0));
}

/// Candidate iff its unnormalized posterior is strictly higher than the center's.
Eigen::Vector3d uphill_update(const Eigen::Vector3d& center, const Eigen::Vector3d& candidate,
                              const ModelSpec& spec, const PriorSpec& prior, const CountSeries& x,
                              double lambda0);

/// Weighted estimate and delta-method standard error of sum_s w_s h(theta_s).
struct WeightedEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd se;
};
WeightedEstimate weighted_estimate(const std::vector<Eigen::Vector3d>& draws, const std::vector<double>& weights,
                                   const Functional& h = {});

PsaisResult psais_run(const ModelSpec& spec, const PriorSpec& prior, const PsaisConfig& config,
                      const CountSeries& x, const Functional& h = {});

}  // namespace ingarch
