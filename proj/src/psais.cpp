#include "ingarch/psais.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ingarch/error.hpp"
#include "ingarch/mle.hpp"

namespace ingarch {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_target(const Eigen::Vector3d& theta, const ModelSpec& spec, const PriorSpec& prior,
                  const CountSeries& x, double lambda0) {
  return log_posterior(spec, prior, ParamVector::from_theta(theta, lambda0), x);
}

}  // namespace

void PsaisConfig::validate() const {
  if (draws < 25) throw ConfigError("PSAIS needs at least 25 draws");
  if (!(nb_tolerance > 0.0 && nb_tolerance < 1.0)) throw ConfigError("nb_tolerance must lie in (0, 1)");
  if (lambda0 && !(*lambda0 > 0.0)) throw ConfigError("lambda0 must be positive");
  if (!(fallback_scale > 0.0)) throw ConfigError("fallback_scale must be positive");
}

double log_raw_ratio(const Eigen::Vector3d& theta, const GaussianProposal& proposal, const ModelSpec& spec,
                     const PriorSpec& prior, const CountSeries& x, double lambda0) {
  const double lp = log_target(theta, spec, prior, x, lambda0);
  if (lp == kNegInf) return kNegInf;
  return lp - proposal.logpdf(theta);
}

Eigen::Vector3d uphill_update(const Eigen::Vector3d& center, const Eigen::Vector3d& candidate,
                              const ModelSpec& spec, const PriorSpec& prior, const CountSeries& x,
                              double lambda0) {
  const double lc = log_target(candidate, spec, prior, x, lambda0);
  const double l0 = log_target(center, spec, prior, x, lambda0);
  return lc > l0 ? candidate : center;
}

WeightedEstimate weighted_estimate(const std::vector<Eigen::Vector3d>& draws, const std::vector<double>& weights,
                                   const Functional& h) {
  if (draws.empty() || draws.size() != weights.size())
    throw ConfigError("weighted_estimate: draws and weights must be non-empty and equal length");
  auto eval = [&](const Eigen::Vector3d& t) -> Eigen::VectorXd { return h ? h(t) : Eigen::VectorXd(t); };
  const Eigen::Index dim = eval(draws.front()).size();
  WeightedEstimate out;
  out.mean = Eigen::VectorXd::Zero(dim);
  for (std::size_t s = 0; s < draws.size(); ++s)
    if (weights[s] > 0.0) out.mean += weights[s] * eval(draws[s]);
  // Delta method for the ratio estimator: Var ~ sum_s w_s^2 (h_s - mean)^2 with normalized w.
  out.se = Eigen::VectorXd::Zero(dim);
  for (std::size_t s = 0; s < draws.size(); ++s)
    if (weights[s] > 0.0) out.se += (weights[s] * (eval(draws[s]) - out.mean)).cwiseAbs2();
  out.se = out.se.cwiseSqrt();
  return out;
}

PsaisResult psais_run(const ModelSpec& spec, const PriorSpec& prior, const PsaisConfig& config,
                      const CountSeries& x, const Functional& h) {
  spec.validate();
  prior.validate();
  config.validate();

  PsaisResult res;
  Eigen::Vector3d center(0.1, 0.1, 0.1);
  double lambda0 = config.lambda0.value_or(1.0);
  if (!config.lambda0 || !config.initial_center) {
    try {
      const MleResult mle = mle_fit(spec, x, ParamVector{});
      if (!config.lambda0) lambda0 = mle.params.lambda0;
      if (!config.initial_center) center = mle.params.theta();
    } catch (const MleNonConvergence& e) {
      if (!config.lambda0) lambda0 = e.best().params.lambda0;
      if (!config.initial_center) center = e.best().params.theta();
    }
  }
  if (config.initial_center) center = *config.initial_center;
  res.lambda0 = lambda0;

  double center_lp = log_target(center, spec, prior, x, lambda0);
  if (center_lp == kNegInf) throw NumericalError("psais_run: initial center has zero posterior density");

  ProposalSettings settings;
  settings.nb_tolerance = config.nb_tolerance;
  settings.linearization = config.linearization;
  auto build = [&](const Eigen::Vector3d& c) {
    try {
      return proposal_at(spec, ParamVector::from_theta(c, lambda0), x, prior.theta, settings).proposal;
    } catch (const NumericalError&) {
      ++res.fallback_proposals;
      return GaussianProposal::spherical(c, config.fallback_scale);
    }
  };

  Rng rng = make_rng(config.seed, 1);
  GaussianProposal g = build(center);
  const std::size_t S = config.draws;
  res.draws.reserve(S);
  res.centers.reserve(S);
  res.center_log_posterior.reserve(S);
  res.log_raw_ratios.reserve(S);

  for (std::size_t s = 0; s < S; ++s) {
    const Eigen::Vector3d theta = g.sample(rng);
    res.centers.push_back(center);
    res.center_log_posterior.push_back(center_lp);
    const double lp = log_target(theta, spec, prior, x, lambda0);
    res.log_raw_ratios.push_back(lp == kNegInf ? kNegInf : lp - g.logpdf(theta));
    if (lp > center_lp) {
      center = theta;
      center_lp = lp;
      res.draws.push_back(theta);
      g = build(center);
    } else {
      res.draws.push_back(config.overwrite_draws ? center : theta);
    }
  }

  const double lmax = *std::max_element(res.log_raw_ratios.begin(), res.log_raw_ratios.end());
  if (lmax == kNegInf) throw NumericalError("psais_run: every draw fell outside the support");
  res.raw_ratios.resize(S);
  for (std::size_t s = 0; s < S; ++s)
    res.raw_ratios[s] = res.log_raw_ratios[s] == kNegInf ? 0.0 : std::exp(res.log_raw_ratios[s] - lmax);

  SmoothedRatios sm = pareto_smooth(res.raw_ratios, config.gpd_method);
  res.gpd = sm.gpd;
  res.tail_smoothed = sm.smoothed;
  double total = 0.0;
  for (double w : sm.weights) total += w;
  res.smoothed_weights.resize(S);
  double sumsq = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    res.smoothed_weights[s] = sm.weights[s] / total;
    sumsq += res.smoothed_weights[s] * res.smoothed_weights[s];
  }
  res.is_ess = 1.0 / sumsq;
  res.khat_threshold = khat_threshold(S);
  res.khat_flag = res.gpd.k_hat > res.khat_threshold;

  const WeightedEstimate est = weighted_estimate(res.draws, res.smoothed_weights, h);
  res.estimate = est.mean;
  res.weighted_se = est.se;
  return res;
}

}  // namespace ingarch
