#pragma once

// Maximum-likelihood fit over (alpha0, alpha1, beta1, lambda0) inside the stationarity region.
//
// Unconstrained coordinates:
//   log-linear: alpha1 = tanh(u1), beta1 = (1 - alpha1) * logistic(u2)   (beta1 >= 0 branch)
//   softplus:   alpha0 = exp(u0), (alpha1, beta1, slack) = softmax(u1, u2, 0) * (1 - 1e-9)
//   lambda0 = exp(u3) for both links.

#include <cstddef>

#include "ingarch/error.hpp"
#include "ingarch/model.hpp"

namespace ingarch {

struct MleOptions {
  std::size_t max_evaluations = 20000;
  /// Skip the quasi-Newton phase (simplex only).
  bool simplex_only = false;
};

struct MleResult {
  ParamVector params;
  double log_lik = 0.0;
  std::size_t evaluations = 0;
};

/// Carries the best point reached before the evaluation budget ran out.
class MleNonConvergence : public NumericalError {
 public:
  MleNonConvergence(const std::string& what, MleResult best) : NumericalError(what), best_(best) {}
  const MleResult& best() const noexcept { return best_; }

 private:
  MleResult best_;
};

/// Throws ConfigError when `init` is not stationary.
MleResult mle_fit(const ModelSpec& spec, const CountSeries& x, const ParamVector& init,
                  const MleOptions& options = {});

}  // namespace ingarch
