#pragma once

// State-dependent Gaussian proposal for theta = (alpha0, alpha1, beta1).
//
// The log-intensity is linearized around the current state, z_t(theta) ~ o_t + J_t' theta,
// the Polya-Gamma latent variables are replaced by their conditional means
// omega_t = (r_t + x_t) / (2 psi_t) tanh(psi_t / 2), and the resulting Gaussian
// conditional of theta gives
//
//   V  = (D' Omega D + B^{-1})^{-1}
//   mu = V (D' kappa_adj + B^{-1} b),   kappa_adj_t = omega_t (log r_t - o_t) + (x_t - r_t) / 2.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ingarch/error.hpp"
#include "ingarch/model.hpp"
#include "ingarch/nb_approx.hpp"
#include "ingarch/rng.hpp"

namespace ingarch {

/// Design matrix stored column-wise so the Gram accumulation streams contiguous memory.
struct DesignColumns {
  std::vector<double> c0, c1, c2;

  std::size_t size() const { return c0.size(); }
  void resize(std::size_t n) {
    c0.resize(n);
    c1.resize(n);
    c2.resize(n);
  }
  Eigen::Vector3d row(std::size_t i) const { return {c0[i], c1[i], c2[i]}; }
  void set_row(std::size_t i, const Eigen::Vector3d& v) {
    c0[i] = v[0];
    c1[i] = v[1];
    c2[i] = v[2];
  }
};

struct Linearization {
  DesignColumns design;         // J_t, t = 1..n
  std::vector<double> offsets;  // o_t
  IntensityPath path;           // intensity at the expansion point
};

struct LinearizationOptions {
  /// Log-linear only: differentiate through nu_{t-1} instead of fixing it at the current state.
  bool loglinear_full_jacobian = false;
};

/// O(n) forward pass. Propagates IntensityOverflow.
Linearization linearize(const ModelSpec& spec, const ParamVector& current, const CountSeries& x,
                        const LinearizationOptions& options = {});

struct GaussianPrior {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Identity();

  static GaussianPrior diagonal(const Eigen::Vector3d& mean, const Eigen::Vector3d& variances);
  /// Throws ConfigError unless cov is symmetric positive definite.
  void validate() const;
  Eigen::Matrix3d precision() const;
  double log_density(const Eigen::Vector3d& theta) const;
};

/// Cholesky failure while assembling or factoring a proposal.
class IllConditionedProposal : public NumericalError {
 public:
  IllConditionedProposal(const std::string& what, double condition)
      : NumericalError(what + " (condition estimate " + std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class GaussianProposal {
 public:
  GaussianProposal() = default;
  /// Throws IllConditionedProposal unless cov is symmetric positive definite.
  GaussianProposal(const Eigen::Vector3d& mean, const Eigen::Matrix3d& cov);

  const Eigen::Vector3d& mean() const { return mean_; }
  const Eigen::Matrix3d& covariance() const { return cov_; }
  /// Lower Cholesky factor of the covariance.
  const Eigen::Matrix3d& chol() const { return chol_; }
  double log_det() const { return log_det_; }
  /// Ratio of the largest to smallest squared Cholesky pivot of the precision.
  double condition() const { return condition_; }

  double logpdf(const Eigen::Vector3d& theta) const;
  Eigen::Vector3d sample(Rng& rng) const;

  /// Spherical N(center, scale^2 I), used when the constructed proposal is unusable.
  static GaussianProposal spherical(const Eigen::Vector3d& center, double scale);

 private:
  friend GaussianProposal build_proposal(const Linearization&, const NbSchedule&, const GaussianPrior&);
  Eigen::Vector3d mean_ = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov_ = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d chol_ = Eigen::Matrix3d::Identity();
  double log_det_ = 0.0;
  double condition_ = 1.0;
};

/// Plug-in Polya-Gamma mean for shape r + x and tilt psi; tanh saturates to sign(psi) beyond |psi| > 30.
double plugin_omega(double shape, double psi);

/// Throws IllConditionedProposal if the precision matrix is not positive definite.
GaussianProposal build_proposal(const Linearization& lin, const NbSchedule& schedule,
                                const GaussianPrior& prior);

inline double proposal_logpdf(const GaussianProposal& prop, const Eigen::Vector3d& theta) {
  return prop.logpdf(theta);
}
inline Eigen::Vector3d sample_proposal(const GaussianProposal& prop, Rng& rng) { return prop.sample(rng); }

/// Everything needed to rebuild the proposal at an arbitrary state.
struct ProposalSettings {
  double nb_tolerance = kDefaultNbTolerance;
  LinearizationOptions linearization;
  /// When set, use these r_t instead of re-selecting them at every state.
  std::optional<std::vector<double>> frozen_r;
};

struct BuiltProposal {
  GaussianProposal proposal;
  std::vector<double> r;
  double mean_r = 0.0;
};

/// build_schedule + build_proposal from an existing linearization.
BuiltProposal proposal_from(const Linearization& lin, const CountSeries& x, const GaussianPrior& prior,
                            const ProposalSettings& settings);

/// linearize + build_schedule + build_proposal at `state`.
BuiltProposal proposal_at(const ModelSpec& spec, const ParamVector& state, const CountSeries& x,
                          const GaussianPrior& prior, const ProposalSettings& settings);

}  // namespace ingarch
