#include <cmath>

#include <doctest.h>

#include "ingarch/error.hpp"
#include "ingarch/mle.hpp"

using namespace ingarch;

namespace {

MleResult fit_or_best(const ModelSpec& spec, const CountSeries& x, const ParamVector& init) {
  try {
    return mle_fit(spec, x, init);
  } catch (const MleNonConvergence& e) {
    return e.best();
  }
}

}  // namespace

TEST_CASE("MLE recovers a long log-linear series") {
  const ParamVector truth{0.0, 0.2, 0.3, 1.0};
  const CountSeries x = simulate(ModelSpec::log_linear(), truth, 100000, 2718);
  const MleResult r = fit_or_best(ModelSpec::log_linear(), x, ParamVector{});
  CHECK(std::abs(r.params.alpha1 - 0.2) < 0.02);
  CHECK(std::abs(r.params.beta1 - 0.3) < 0.02);
  CHECK(std::abs(r.params.alpha0) < 0.02);
  CHECK(r.log_lik >= log_likelihood(ModelSpec::log_linear(), truth, x) - 1e-6);
  CHECK(r.log_lik == doctest::Approx(log_likelihood(ModelSpec::log_linear(), r.params, x)).epsilon(1e-12));
}

TEST_CASE("MLE stays inside the stationarity region") {
  for (const bool sp : {false, true}) {
    const ModelSpec spec = sp ? ModelSpec::softplus(1.0) : ModelSpec::log_linear();
    const ParamVector truth = sp ? ParamVector{0.3, 0.4, 0.25, 1.0} : ParamVector{0.3, 0.2, 0.6, 3.0};
    const CountSeries x = simulate(spec, truth, 800, 17);
    const MleResult r = fit_or_best(spec, x, sp ? ParamVector{0.5, 0.2, 0.2, 1.0} : ParamVector{});
    CHECK(check_stationarity(spec, r.params));
    CHECK(r.params.lambda0 > 0.0);
    CHECK(r.log_lik >= log_likelihood(spec, truth, x) - 1e-6);
    CHECK(r.evaluations > 0);
  }
}

TEST_CASE("MLE input checks") {
  const CountSeries x({1, 2, 3, 2, 1});
  CHECK_THROWS_AS(mle_fit(ModelSpec::log_linear(), x, {0.1, 0.5, 0.6, 1.0}), ConfigError);
  CHECK_THROWS_AS(mle_fit(ModelSpec::softplus(1.0), x, {-0.1, 0.2, 0.2, 1.0}), ConfigError);
}

TEST_CASE("an exhausted budget reports the best point") {
  const CountSeries x = simulate(ModelSpec::log_linear(), {0.3, 0.2, 0.6, 3.0}, 400, 3);
  try {
    mle_fit(ModelSpec::log_linear(), x, ParamVector{}, {.max_evaluations = 5});
    FAIL("expected non-convergence");
  } catch (const MleNonConvergence& e) {
    CHECK(check_stationarity(ModelSpec::log_linear(), e.best().params));
    CHECK(std::isfinite(e.best().log_lik));
  }
}
