#include "ingarch/mh_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ingarch/error.hpp"

namespace ingarch {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double safe_loglik(const IntensityPath& path, const CountSeries& x) {
  const double ll = log_likelihood(path, x);
  return std::isfinite(ll) ? ll : kNegInf;
}

// Proposal at one state together with everything reused from its linearization.
struct Anchor {
  GaussianProposal proposal;
  double loglik = kNegInf;
  double mean_r = 0.0;
  std::vector<double> r;
  bool fallback = false;
};

// Linearize once; the same intensity path supplies the exact likelihood.
// Returns nullopt when the recursion overflows (zero likelihood).
std::optional<Anchor> anchor_at(const ModelSpec& spec, const ParamVector& p, const CountSeries& x,
                                const GaussianPrior& prior, const ProposalSettings& settings,
                                double fallback_scale) {
  Linearization lin;
  try {
    lin = linearize(spec, p, x, settings.linearization);
  } catch (const IntensityOverflow&) {
    return std::nullopt;
  }
  Anchor a;
  a.loglik = safe_loglik(lin.path, x);
  if (a.loglik == kNegInf) return std::nullopt;
  try {
    BuiltProposal built = proposal_from(lin, x, prior, settings);
    a.proposal = std::move(built.proposal);
    a.mean_r = built.mean_r;
    a.r = std::move(built.r);
  } catch (const NumericalError&) {
    a.proposal = GaussianProposal::spherical(p.theta(), fallback_scale);
    a.fallback = true;
  }
  return a;
}

// Conditional Gaussian of the coordinates in `block` given the others fixed at `theta`.
struct BlockGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;  // lower factor of the conditional covariance
  double log_det = 0.0;
};

BlockGaussian conditional(const GaussianProposal& g, const std::vector<int>& block,
                          const Eigen::Vector3d& theta) {
  const Eigen::Matrix3d q = g.covariance().inverse();
  std::vector<int> rest;
  for (int i = 0; i < 3; ++i)
    if (std::find(block.begin(), block.end(), i) == block.end()) rest.push_back(i);
  const int k = static_cast<int>(block.size());
  Eigen::MatrixXd q_bb(k, k);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) q_bb(i, j) = q(block[i], block[j]);
    for (int c : rest) shift[i] += q(block[i], c) * (theta[c] - g.mean()[c]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(q_bb);
  if (llt.info() != Eigen::Success) throw NumericalError("conditional proposal precision not positive definite");
  BlockGaussian out;
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
  out.mean.resize(k);
  for (int i = 0; i < k; ++i) out.mean[i] = g.mean()[block[i]];
  out.mean -= cov * shift;
  Eigen::LLT<Eigen::MatrixXd> cov_llt(0.5 * (cov + cov.transpose()));
  if (cov_llt.info() != Eigen::Success) throw NumericalError("conditional proposal covariance not positive definite");
  out.chol = cov_llt.matrixL();
  out.log_det = 2.0 * out.chol.diagonal().array().log().sum();
  return out;
}

double block_logpdf(const BlockGaussian& g, const Eigen::VectorXd& v) {
  const Eigen::VectorXd z = g.chol.triangularView<Eigen::Lower>().solve(v - g.mean);
  return -0.5 * (static_cast<double>(v.size()) * kLog2Pi + g.log_det + z.squaredNorm());
}

bool accept(double log_ratio, Rng& rng) {
  const double u = uniform_open(rng);
  if (std::isnan(log_ratio)) return false;
  return log_ratio >= 0.0 || std::log(u) < log_ratio;
}

}  // namespace

double gamma_log_density(double v, double shape, double rate) {
  if (!(v > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(v) - rate * v;
}

void PriorSpec::validate() const {
  theta.validate();
  if (!(lambda0_shape > 0.0 && std::isfinite(lambda0_shape)) || !(lambda0_rate > 0.0 && std::isfinite(lambda0_rate)))
    throw ConfigError("lambda0 prior shape and rate must be positive");
}

double PriorSpec::log_density(const ParamVector& p) const {
  return theta.log_density(p.theta()) + gamma_log_density(p.lambda0, lambda0_shape, lambda0_rate);
}

void MhConfig::validate() const {
  if (iterations == 0) throw ConfigError("iterations must be positive");
  if (burn_in >= iterations) throw ConfigError("burn_in must be smaller than iterations");
  if (!(nb_tolerance > 0.0 && nb_tolerance < 1.0)) throw ConfigError("nb_tolerance must lie in (0, 1)");
  if (!(lambda0_proposal_shape > 0.0)) throw ConfigError("lambda0 proposal shape must be positive");
  if (lambda0_proposal_rate && !(*lambda0_proposal_rate > 0.0))
    throw ConfigError("lambda0 proposal rate must be positive");
  if (!(fallback_scale > 0.0)) throw ConfigError("fallback_scale must be positive");
}

double MhConfig::lambda0_rate_for(const CountSeries& x) const {
  if (lambda0_proposal_rate) return *lambda0_proposal_rate;
  const double m = x.mean();
  return lambda0_proposal_shape / (m > 0.0 ? m : 1.0);
}

ProposalSettings MhConfig::proposal_settings() const {
  ProposalSettings s;
  s.nb_tolerance = nb_tolerance;
  s.linearization = linearization;
  return s;
}

double ChainResult::acceptance_rate_theta(bool post_burn_in) const {
  const std::size_t start = post_burn_in ? std::min(burn_in, accepted_theta.size()) : 0;
  if (start >= accepted_theta.size()) return 0.0;
  std::size_t k = 0;
  for (std::size_t i = start; i < accepted_theta.size(); ++i) k += accepted_theta[i];
  return static_cast<double>(k) / static_cast<double>(accepted_theta.size() - start);
}

double ChainResult::acceptance_rate_lambda0(bool post_burn_in) const {
  const std::size_t start = post_burn_in ? std::min(burn_in, accepted_lambda0.size()) : 0;
  if (start >= accepted_lambda0.size()) return 0.0;
  std::size_t k = 0;
  for (std::size_t i = start; i < accepted_lambda0.size(); ++i) k += accepted_lambda0[i];
  return static_cast<double>(k) / static_cast<double>(accepted_lambda0.size() - start);
}

double log_posterior(const ModelSpec& spec, const PriorSpec& prior, const ParamVector& p,
                     const CountSeries& x) {
  if (!(p.lambda0 > 0.0) || !check_stationarity(spec, p)) return kNegInf;
  double ll;
  try {
    ll = log_likelihood(spec, p, x);
  } catch (const IntensityOverflow&) {
    return kNegInf;
  }
  if (!std::isfinite(ll)) return kNegInf;
  return ll + prior.log_density(p);
}

double ThetaMove::log_ratio() const {
  if (!in_support) return kNegInf;
  return (log_target_candidate - log_target_current) + (log_reverse - log_forward);
}

ThetaMove evaluate_theta_move(const ParamVector& current, const Eigen::Vector3d& candidate,
                              const GaussianProposal& forward, const ModelSpec& spec,
                              const PriorSpec& prior, const MhConfig& config, const CountSeries& x) {
  ThetaMove m;
  m.candidate = candidate;
  const auto prior_term = [&](const Eigen::Vector3d& th) {
    return config.include_prior_in_ratio ? prior.theta.log_density(th) : 0.0;
  };
  double ll_cur;
  try {
    ll_cur = log_likelihood(spec, current, x);
  } catch (const IntensityOverflow&) {
    ll_cur = kNegInf;
  }
  m.log_target_current = ll_cur + prior_term(current.theta());
  m.log_forward = forward.logpdf(candidate);

  const ParamVector cand = ParamVector::from_theta(candidate, current.lambda0);
  if (!check_stationarity(spec, cand)) return m;
  const auto a = anchor_at(spec, cand, x, prior.theta, config.proposal_settings(), config.fallback_scale);
  if (!a) return m;
  m.in_support = true;
  m.fallback = a->fallback;
  m.log_target_candidate = a->loglik + prior_term(candidate);
  m.log_reverse = a->proposal.logpdf(current.theta());
  return m;
}

ThetaStep mh_theta_step(const ParamVector& state, const ModelSpec& spec, const PriorSpec& prior,
                        const MhConfig& config, const CountSeries& x, Rng& rng) {
  if (!check_stationarity(spec, state)) throw ConfigError("mh_theta_step: current state is not stationary");
  const auto a = anchor_at(spec, state, x, prior.theta, config.proposal_settings(), config.fallback_scale);
  if (!a) throw NumericalError("mh_theta_step: likelihood vanishes at the current state");
  ThetaStep step;
  step.proposal_used = a->proposal;
  const Eigen::Vector3d cand = a->proposal.sample(rng);
  step.move = evaluate_theta_move(state, cand, a->proposal, spec, prior, config, x);
  step.accepted = accept(step.move.log_ratio(), rng);
  step.state = step.accepted ? ParamVector::from_theta(cand, state.lambda0) : state;
  return step;
}

Lambda0Step mh_lambda0_step(const ParamVector& state, const ModelSpec& spec, const PriorSpec& prior,
                            const MhConfig& config, const CountSeries& x, Rng& rng) {
  if (!(state.lambda0 > 0.0)) throw ConfigError("mh_lambda0_step: lambda0 must be positive");
  const double a1 = config.lambda0_proposal_shape;
  const double b1 = config.lambda0_rate_for(x);
  std::gamma_distribution<double> gamma(a1, 1.0 / b1);
  double cand = gamma(rng);
  // The Gamma sampler can underflow to 0 for tiny shapes; nudge into the support.
  if (!(cand > 0.0)) cand = std::numeric_limits<double>::min();

  ParamVector proposed = state;
  proposed.lambda0 = cand;
  const double lp_cand = log_posterior(spec, prior, proposed, x);
  const double lp_cur = log_posterior(spec, prior, state, x);
  Lambda0Step out;
  out.log_ratio = (lp_cand - lp_cur) + (gamma_log_density(state.lambda0, a1, b1) - gamma_log_density(cand, a1, b1));
  out.accepted = lp_cand != kNegInf && accept(out.log_ratio, rng);
  out.lambda0 = out.accepted ? cand : state.lambda0;
  return out;
}

ChainResult run_chain(const ModelSpec& spec, const PriorSpec& prior, const MhConfig& config,
                      const CountSeries& x, const ParamVector& init) {
  spec.validate();
  prior.validate();
  config.validate();
  if (!check_stationarity(spec, init)) throw ConfigError("run_chain: initial theta is not stationary");
  if (!(init.lambda0 > 0.0)) throw ConfigError("run_chain: initial lambda0 must be positive");

  Rng rng = make_rng(config.seed, 0);
  ProposalSettings settings = config.proposal_settings();
  const double a1 = config.lambda0_proposal_shape;
  const double b1 = config.lambda0_rate_for(x);
  const auto prior_term = [&](const Eigen::Vector3d& th) {
    return config.include_prior_in_ratio ? prior.theta.log_density(th) : 0.0;
  };

  ChainResult out;
  out.seed = config.seed;
  out.burn_in = config.burn_in;
  out.draws.reserve(config.iterations);
  out.accepted_theta.reserve(config.iterations);
  out.accepted_lambda0.reserve(config.iterations);
  out.mean_r.reserve(config.iterations);

  ParamVector state = init;
  std::optional<Anchor> cur;
  auto ensure_anchor = [&] {
    if (cur) return;
    cur = anchor_at(spec, state, x, prior.theta, settings, config.fallback_scale);
    if (!cur) throw NumericalError("run_chain: likelihood vanishes at the current state");
    out.fallback_proposals += cur->fallback;
  };

  // One MH move of the coordinates in `block` (all three for the joint update).
  auto theta_move = [&](const std::vector<int>& block) -> bool {
    ensure_anchor();
    const Eigen::Vector3d th = state.theta();
    Eigen::Vector3d cand = th;
    double log_fwd, log_rev;
    std::optional<BlockGaussian> fwd_block;
    if (block.size() == 3) {
      cand = cur->proposal.sample(rng);
      log_fwd = cur->proposal.logpdf(cand);
    } else {
      fwd_block = conditional(cur->proposal, block, th);
      Eigen::VectorXd z(block.size());
      for (auto& v : z) v = standard_normal(rng);
      const Eigen::VectorXd draw = fwd_block->mean + fwd_block->chol.triangularView<Eigen::Lower>() * z;
      for (std::size_t i = 0; i < block.size(); ++i) cand[block[i]] = draw[i];
      log_fwd = block_logpdf(*fwd_block, draw);
    }
    const double u_log = std::log(uniform_open(rng));

    const ParamVector proposed = ParamVector::from_theta(cand, state.lambda0);
    if (!check_stationarity(spec, proposed)) return false;
    auto next = anchor_at(spec, proposed, x, prior.theta, settings, config.fallback_scale);
    if (!next) return false;
    if (block.size() == 3) {
      log_rev = next->proposal.logpdf(th);
    } else {
      const BlockGaussian rev = conditional(next->proposal, block, cand);
      Eigen::VectorXd back(block.size());
      for (std::size_t i = 0; i < block.size(); ++i) back[i] = th[block[i]];
      log_rev = block_logpdf(rev, back);
    }
    const double log_ratio =
        (next->loglik + prior_term(cand)) - (cur->loglik + prior_term(th)) + (log_rev - log_fwd);
    out.fallback_proposals += next->fallback;
    if (std::isnan(log_ratio) || !(log_ratio >= 0.0 || u_log < log_ratio)) return false;
    state = proposed;
    cur = std::move(next);
    return true;
  };

  static const std::vector<int> kJoint{0, 1, 2}, kIntercept{0}, kSlopes{1, 2};

  for (std::size_t it = 0; it < config.iterations; ++it) {
    if (config.freeze_r_after && it == *config.freeze_r_after && !settings.frozen_r) {
      ensure_anchor();
      std::vector<double> r = cur->r;
      if (r.empty() && x.n() > 0) {
        const IntensityPath path = intensity_path(spec, state, x);
        r = build_schedule(path, x, settings.nb_tolerance).r;
      }
      settings.frozen_r = std::move(r);
      cur.reset();
    }

    ensure_anchor();
    out.mean_r.push_back(cur->mean_r);
    bool acc_theta;
    if (config.mode == UpdateMode::Joint) {
      acc_theta = theta_move(kJoint);
    } else {
      const bool a0 = theta_move(kIntercept);
      const bool a12 = theta_move(kSlopes);
      acc_theta = a0 || a12;
    }

    bool acc_l0 = false;
    if (config.update_lambda0) {
      std::gamma_distribution<double> gamma(a1, 1.0 / b1);
      double cand = gamma(rng);
      if (!(cand > 0.0)) cand = std::numeric_limits<double>::min();
      const double u_log = std::log(uniform_open(rng));
      ParamVector proposed = state;
      proposed.lambda0 = cand;
      double ll_cand = kNegInf;
      try {
        ll_cand = safe_loglik(intensity_path(spec, proposed, x), x);
      } catch (const IntensityOverflow&) {
      }
      if (ll_cand != kNegInf) {
        ensure_anchor();
        const double log_ratio =
            (ll_cand + gamma_log_density(cand, prior.lambda0_shape, prior.lambda0_rate)) -
            (cur->loglik + gamma_log_density(state.lambda0, prior.lambda0_shape, prior.lambda0_rate)) +
            (gamma_log_density(state.lambda0, a1, b1) - gamma_log_density(cand, a1, b1));
        if (!std::isnan(log_ratio) && (log_ratio >= 0.0 || u_log < log_ratio)) {
          state = proposed;
          cur.reset();
          acc_l0 = true;
        }
      }
    }

    out.draws.push_back(state);
    out.accepted_theta.push_back(acc_theta);
    out.accepted_lambda0.push_back(acc_l0);
  }
  return out;
}

}  // namespace ingarch
