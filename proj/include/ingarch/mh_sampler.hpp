#pragma once

// Metropolis-Hastings-within-Gibbs sampler for (alpha0, alpha1, beta1, lambda0).
//
// Each iteration performs
//   1. a theta update with the state-dependent Gaussian proposal, accepted with the
//      exact Poisson likelihood and the forward/reverse proposal densities;
//   2. an independence update of lambda0 with a Gamma(a1, b1) proposal.

#include <cstdint>
#include <optional>
#include <vector>

#include "ingarch/model.hpp"
#include "ingarch/proposal.hpp"
#include "ingarch/rng.hpp"

namespace ingarch {

struct PriorSpec {
  /// N(b, B) on theta, restricted to the stationarity region.
  GaussianPrior theta;
  /// Gamma(shape, rate) on lambda0.
  double lambda0_shape = 1.0;
  double lambda0_rate = 0.1;

  void validate() const;
  /// log N(theta; b, B) + log Gamma(lambda0; shape, rate), ignoring the region indicator.
  double log_density(const ParamVector& p) const;
};

enum class UpdateMode { Joint, Blocked };

struct MhConfig {
  std::size_t iterations = 10'000;
  std::size_t burn_in = 5'000;
  std::uint64_t seed = 1;
  double nb_tolerance = kDefaultNbTolerance;
  LinearizationOptions linearization;
  /// Freeze the r_t schedule at the state reached after this many iterations.
  std::optional<std::size_t> freeze_r_after;
  /// Gamma(a1, b1) independence proposal for lambda0. b1 defaults to a1 / mean(x).
  double lambda0_proposal_shape = 2.0;
  std::optional<double> lambda0_proposal_rate;
  bool include_prior_in_ratio = true;
  UpdateMode mode = UpdateMode::Joint;
  /// Hold lambda0 at its initial value (fixed-lambda0 posteriors).
  bool update_lambda0 = true;
  /// Spherical proposal scale used when the Gaussian proposal cannot be factored.
  double fallback_scale = 0.05;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  double lambda0_rate_for(const CountSeries& x) const;
  ProposalSettings proposal_settings() const;
};

struct ChainResult {
  /// One row per iteration (burn-in included).
  std::vector<ParamVector> draws;
  std::vector<std::uint8_t> accepted_theta;
  std::vector<std::uint8_t> accepted_lambda0;
  /// Mean of r_t in the forward proposal of each iteration.
  std::vector<double> mean_r;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  std::size_t fallback_proposals = 0;

  std::size_t size() const { return draws.size(); }
  double acceptance_rate_theta(bool post_burn_in = true) const;
  double acceptance_rate_lambda0(bool post_burn_in = true) const;
  bool operator==(const ChainResult&) const = default;
};

/// Exact log posterior up to a constant; -infinity outside the support (never throws for overflow).
double log_posterior(const ModelSpec& spec, const PriorSpec& prior, const ParamVector& p,
                     const CountSeries& x);

/// The four log terms of a theta move, kept separately for inspection.
struct ThetaMove {
  Eigen::Vector3d candidate = Eigen::Vector3d::Zero();
  double log_target_candidate = 0;  // log L (+ log prior) at the candidate
  double log_target_current = 0;
  double log_forward = 0;           // log g(candidate | current)
  double log_reverse = 0;           // log g(current | candidate)
  bool in_support = false;
  bool fallback = false;

  double log_ratio() const;
};

struct ThetaStep {
  ParamVector state;
  bool accepted = false;
  GaussianProposal proposal_used;
  ThetaMove move;
};

/// Assemble the acceptance terms for moving from `current` to an explicit `candidate`.
ThetaMove evaluate_theta_move(const ParamVector& current, const Eigen::Vector3d& candidate,
                              const GaussianProposal& forward, const ModelSpec& spec,
                              const PriorSpec& prior, const MhConfig& config, const CountSeries& x);

/// One joint theta update from scratch (builds the forward proposal at `state`).
ThetaStep mh_theta_step(const ParamVector& state, const ModelSpec& spec, const PriorSpec& prior,
                        const MhConfig& config, const CountSeries& x, Rng& rng);

struct Lambda0Step {
  double lambda0 = 1.0;
  bool accepted = false;
  double log_ratio = 0.0;
};

Lambda0Step mh_lambda0_step(const ParamVector& state, const ModelSpec& spec, const PriorSpec& prior,
                            const MhConfig& config, const CountSeries& x, Rng& rng);

/// Full chain. Throws ConfigError if `init` is outside the stationarity region.
ChainResult run_chain(const ModelSpec& spec, const PriorSpec& prior, const MhConfig& config,
                      const CountSeries& x, const ParamVector& init);

/// Log density of Gamma(shape, rate) at v, including the normalizing constant.
double gamma_log_density(double v, double shape, double rate);

}  // namespace ingarch
