#include "ingarch/proposal.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ingarch/polya_gamma.hpp"
#include "ingarch/simd/kernels.hpp"

namespace ingarch {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double pivot_condition(const Eigen::Matrix3d& lower) {
  const Eigen::Vector3d d = lower.diagonal().cwiseAbs();
  const double ratio = d.maxCoeff() / d.minCoeff();
  return ratio * ratio;
}

}  // namespace

Linearization linearize(const ModelSpec& spec, const ParamVector& current, const CountSeries& x,
                        const LinearizationOptions& options) {
  Linearization lin;
  lin.path = intensity_path(spec, current, x);
  const std::size_t n = x.n();
  lin.design.resize(n);
  lin.offsets.assign(n, 0.0);
  const Eigen::Vector3d theta = current.theta();
  const double a1 = current.alpha1;

  if (spec.link == Link::LogLinear) {
    const auto l1p = x.log1p_counts();
    double nu_prev = std::log(current.lambda0);
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d d(1.0, nu_prev, l1p[i]);
      if (options.loglinear_full_jacobian) {
        grad = d + a1 * grad;
        lin.design.set_row(i, grad);
        lin.offsets[i] = lin.path.eta[i] - grad.dot(theta);
      } else {
        lin.design.set_row(i, d);
      }
      nu_prev = lin.path.eta[i];
    }
    return lin;
  }

  const double c = spec.softplus_scale;
  const auto xd = x.as_double();
  double lambda_prev = current.lambda0;
  Eigen::Vector3d h = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d g = Eigen::Vector3d(1.0, lambda_prev, xd[i]) + a1 * h;
    h = softplus_derivative(lin.path.eta[i], c) * g;
    const Eigen::Vector3d jac = h / lin.path.lambda[i];
    lin.design.set_row(i, jac);
    lin.offsets[i] = lin.path.log_lambda[i] - jac.dot(theta);
    lambda_prev = lin.path.lambda[i];
  }
  return lin;
}

GaussianPrior GaussianPrior::diagonal(const Eigen::Vector3d& mean, const Eigen::Vector3d& variances) {
  GaussianPrior p;
  p.mean = mean;
  p.cov = variances.asDiagonal();
  return p;
}

void GaussianPrior::validate() const {
  if (!cov.allFinite() || !mean.allFinite()) throw ConfigError("prior contains non-finite values");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff()))
    throw ConfigError("prior covariance is not symmetric");
  Eigen::LLT<Eigen::Matrix3d> llt(cov);
  if (llt.info() != Eigen::Success) throw ConfigError("prior covariance is not positive definite");
}

Eigen::Matrix3d GaussianPrior::precision() const {
  return Eigen::LLT<Eigen::Matrix3d>(cov).solve(Eigen::Matrix3d::Identity());
}

double GaussianPrior::log_density(const Eigen::Vector3d& theta) const {
  Eigen::LLT<Eigen::Matrix3d> llt(cov);
  const Eigen::Matrix3d lower = llt.matrixL();
  const Eigen::Vector3d z = lower.triangularView<Eigen::Lower>().solve(theta - mean);
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  return -0.5 * (3.0 * kLog2Pi + log_det + z.squaredNorm());
}

GaussianProposal::GaussianProposal(const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov)
    : mean_(mean), cov_(0.5 * (cov + cov.transpose())) {
  Eigen::LLT<Eigen::Matrix3d> llt(cov_);
  if (llt.info() != Eigen::Success || !cov_.allFinite() || !mean_.allFinite()) {
    const double diag_ratio = cov_.diagonal().cwiseAbs().maxCoeff() /
                              std::max(cov_.diagonal().cwiseAbs().minCoeff(), 1e-300);
    throw IllConditionedProposal("proposal covariance is not positive definite", diag_ratio);
  }
  chol_ = llt.matrixL();
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
  condition_ = pivot_condition(chol_);
}

double GaussianProposal::logpdf(const Eigen::Vector3d& theta) const {
  const Eigen::Vector3d z = chol_.triangularView<Eigen::Lower>().solve(theta - mean_);
  return -0.5 * (3.0 * kLog2Pi + log_det_ + z.squaredNorm());
}

Eigen::Vector3d GaussianProposal::sample(Rng& rng) const {
  Eigen::Vector3d z;
  for (int i = 0; i < 3; ++i) z[i] = standard_normal(rng);
  return mean_ + chol_.triangularView<Eigen::Lower>() * z;
}

GaussianProposal GaussianProposal::spherical(const Eigen::Vector3d& center, double scale) {
  return GaussianProposal(center, Eigen::Matrix3d::Identity() * (scale * scale));
}

double plugin_omega(double shape, double psi) {
  if (std::abs(psi) > 30.0) return shape / (2.0 * std::abs(psi));
  return pg::mean(shape, psi);
}

GaussianProposal build_proposal(const Linearization& lin, const NbSchedule& schedule,
                                const GaussianPrior& prior) {
  const std::size_t n = lin.design.size();
  if (schedule.size() != n || lin.offsets.size() != n)
    throw ConfigError("build_proposal: linearization and schedule lengths disagree");

  std::vector<double> omega(n), kappa_adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    omega[i] = plugin_omega(schedule.shape[i], schedule.psi[i]);
    kappa_adj[i] = omega[i] * (schedule.log_r[i] - lin.offsets[i]) + schedule.kappa[i];
  }

  const simd::Gram3 g = simd::gram3(lin.design.c0, lin.design.c1, lin.design.c2, omega, kappa_adj);
  const Eigen::Matrix3d prior_precision = prior.precision();
  Eigen::Matrix3d precision;
  precision << g.s00, g.s01, g.s02, g.s01, g.s11, g.s12, g.s02, g.s12, g.s22;
  precision += prior_precision;
  const Eigen::Vector3d rhs = Eigen::Vector3d(g.r0, g.r1, g.r2) + prior_precision * prior.mean;

  Eigen::LLT<Eigen::Matrix3d> llt(precision);
  if (llt.info() != Eigen::Success || !precision.allFinite()) {
    double cond = std::numeric_limits<double>::infinity();
    if (precision.allFinite()) {
      const Eigen::Vector3d ev =
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(precision, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs();
      cond = ev.maxCoeff() / std::max(ev.minCoeff(), 1e-300);
    }
    throw IllConditionedProposal("proposal precision D'WD + B^-1 is not positive definite", cond);
  }
  const Eigen::Vector3d mean = llt.solve(rhs);
  const Eigen::Matrix3d cov = llt.solve(Eigen::Matrix3d::Identity());
  GaussianProposal prop(mean, cov);
  prop.condition_ = pivot_condition(llt.matrixL());
  return prop;
}

BuiltProposal proposal_from(const Linearization& lin, const CountSeries& x, const GaussianPrior& prior,
                            const ProposalSettings& settings) {
  NbSchedule schedule = settings.frozen_r
                            ? schedule_from_r(lin.path, x, *settings.frozen_r, settings.nb_tolerance)
                            : build_schedule(lin.path, x, settings.nb_tolerance);
  BuiltProposal out;
  out.proposal = build_proposal(lin, schedule, prior);
  out.mean_r = schedule.mean_r();
  out.r = std::move(schedule.r);
  return out;
}

BuiltProposal proposal_at(const ModelSpec& spec, const ParamVector& state, const CountSeries& x,
                          const GaussianPrior& prior, const ProposalSettings& settings) {
  return proposal_from(linearize(spec, state, x, settings.linearization), x, prior, settings);
}

}  // namespace ingarch
