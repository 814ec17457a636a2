#include <cmath>
#include <random>

#include <doctest.h>

#include "ingarch/diagnostics.hpp"
#include "ingarch/error.hpp"
#include "ingarch/mh_sampler.hpp"
#include "oracles.hpp"

using namespace ingarch;

namespace {

const ParamVector kA1{0.3, 0.2, 0.6, 3.0};

PriorSpec unit_prior() {
  PriorSpec p;
  p.theta = GaussianPrior::diagonal({0, 0, 0}, {1, 1, 1});
  return p;
}

double gauss_logpdf(const Eigen::Vector3d& t, const Eigen::Vector3d& m, double var) {
  return -0.5 * (3.0 * std::log(2.0 * M_PI * var) + (t - m).squaredNorm() / var);
}

std::vector<std::int64_t> raw(const CountSeries& x) { return {x.values().begin(), x.values().end()}; }

}  // namespace

TEST_CASE("log posterior") {
  const CountSeries x = simulate(ModelSpec::log_linear(), kA1, 120, 3);
  const PriorSpec prior = unit_prior();
  SUBCASE("independent recomputation") {
    const auto v = raw(x);
    const double ll = oracle::poisson_loglik(oracle::intensities(false, 1, 0.3, 0.2, 0.6, 3.0, v), v);
    const double lp = ll + gauss_logpdf(kA1.theta(), Eigen::Vector3d::Zero(), 1.0) + std::log(0.1) - 0.1 * 3.0;
    CHECK(log_posterior(ModelSpec::log_linear(), prior, kA1, x) == doctest::Approx(lp).epsilon(1e-12));
  }
  SUBCASE("outside the support") {
    CHECK(log_posterior(ModelSpec::log_linear(), prior, {0.1, 0.5, 0.6, 3.0}, x) == -INFINITY);
    CHECK(log_posterior(ModelSpec::log_linear(), prior, {0.1, 0.2, 0.3, 0.0}, x) == -INFINITY);
    CHECK(log_posterior(ModelSpec::softplus(1.0), prior, {-0.1, 0.2, 0.3, 1.0}, x) == -INFINITY);
  }
  SUBCASE("prior only when there are no observations") {
    const CountSeries x0({4});
    const ParamVector p{0.1, 0.2, 0.3, 2.0};
    CHECK(log_posterior(ModelSpec::log_linear(), prior, p, x0) == doctest::Approx(prior.log_density(p)).epsilon(1e-15));
  }
  CHECK(gamma_log_density(2.0, 3.0, 0.5) == doctest::Approx(std::log(0.125 / 2.0 * 4.0 * std::exp(-1.0))));
  CHECK(gamma_log_density(0.0, 1.0, 1.0) == -INFINITY);
}

TEST_CASE("theta move assembly") {
  const ModelSpec spec = ModelSpec::log_linear();
  const PriorSpec prior = unit_prior();
  MhConfig cfg;

  SUBCASE("staying put has log ratio 0") {
    const CountSeries x = simulate(spec, kA1, 200, 5);
    const GaussianProposal fwd = proposal_at(spec, kA1, x, prior.theta, cfg.proposal_settings()).proposal;
    const ThetaMove m = evaluate_theta_move(kA1, kA1.theta(), fwd, spec, prior, cfg, x);
    REQUIRE(m.in_support);
    CHECK(std::abs(m.log_ratio()) < 1e-12);
  }
  SUBCASE("two observations") {
    const CountSeries x({1, 3, 2});
    const ParamVector cur{0.2, 0.1, 0.4, 1.5};
    const Eigen::Vector3d cand(0.35, -0.05, 0.5);
    const GaussianProposal g_cur = proposal_at(spec, cur, x, prior.theta, cfg.proposal_settings()).proposal;
    const GaussianProposal g_cand =
        proposal_at(spec, ParamVector::from_theta(cand, 1.5), x, prior.theta, cfg.proposal_settings()).proposal;
    const auto v = raw(x);
    const double ll_cur = oracle::poisson_loglik(oracle::intensities(false, 1, 0.2, 0.1, 0.4, 1.5, v), v);
    const double ll_cand = oracle::poisson_loglik(oracle::intensities(false, 1, 0.35, -0.05, 0.5, 1.5, v), v);
    const double expected = (ll_cand + gauss_logpdf(cand, Eigen::Vector3d::Zero(), 1.0)) -
                            (ll_cur + gauss_logpdf(cur.theta(), Eigen::Vector3d::Zero(), 1.0)) +
                            g_cand.logpdf(cur.theta()) - g_cur.logpdf(cand);
    const ThetaMove m = evaluate_theta_move(cur, cand, g_cur, spec, prior, cfg, x);
    CHECK(m.log_ratio() == doctest::Approx(expected).epsilon(1e-10));

    cfg.include_prior_in_ratio = false;
    const ThetaMove no_prior = evaluate_theta_move(cur, cand, g_cur, spec, prior, cfg, x);
    CHECK(no_prior.log_ratio() ==
          doctest::Approx(expected - gauss_logpdf(cand, Eigen::Vector3d::Zero(), 1.0) +
                          gauss_logpdf(cur.theta(), Eigen::Vector3d::Zero(), 1.0))
              .epsilon(1e-10));
  }
  SUBCASE("non-stationary candidate is rejected") {
    const CountSeries x({1, 3, 2});
    const GaussianProposal fwd = proposal_at(spec, kA1, x, prior.theta, cfg.proposal_settings()).proposal;
    const ThetaMove m = evaluate_theta_move(kA1, Eigen::Vector3d(0.0, 0.7, 0.6), fwd, spec, prior, cfg, x);
    CHECK_FALSE(m.in_support);
    CHECK(m.log_ratio() == -INFINITY);
  }
  SUBCASE("single step from scratch") {
    const CountSeries x = simulate(spec, kA1, 200, 5);
    Rng rng = make_rng(3);
    const ThetaStep s = mh_theta_step(kA1, spec, prior, cfg, x, rng);
    CHECK(check_stationarity(spec, s.state));
    CHECK(s.state.lambda0 == kA1.lambda0);
    CHECK_THROWS_AS(mh_theta_step({0.1, 0.5, 0.6, 3.0}, spec, prior, cfg, x, rng), ConfigError);
  }
}

TEST_CASE("lambda0 step with a proposal equal to its conditional") {
  // With alpha1 = 0 the likelihood ignores lambda0, so the conditional is the Gamma prior.
  const CountSeries x({2, 1, 4, 0, 3});
  PriorSpec prior = unit_prior();
  MhConfig cfg;
  cfg.lambda0_proposal_shape = prior.lambda0_shape;
  cfg.lambda0_proposal_rate = prior.lambda0_rate;
  Rng rng = make_rng(8);
  ParamVector p{0.1, 0.0, 0.3, 4.0};
  for (int i = 0; i < 200; ++i) {
    const Lambda0Step s = mh_lambda0_step(p, ModelSpec::log_linear(), prior, cfg, x, rng);
    CHECK(std::abs(s.log_ratio) < 1e-9);
    CHECK(s.accepted);
    p.lambda0 = s.lambda0;
  }
}

TEST_CASE("chain determinism and support") {
  const CountSeries x = simulate(ModelSpec::log_linear(), kA1, 200, 6);
  MhConfig cfg;
  cfg.iterations = 400;
  cfg.burn_in = 100;
  cfg.seed = 77;
  const ChainResult a = run_chain(ModelSpec::log_linear(), unit_prior(), cfg, x, kA1);
  const ChainResult b = run_chain(ModelSpec::log_linear(), unit_prior(), cfg, x, kA1);
  CHECK(a == b);
  cfg.seed = 78;
  const ChainResult c = run_chain(ModelSpec::log_linear(), unit_prior(), cfg, x, kA1);
  CHECK_FALSE(a == c);
  CHECK(a.size() == 400);
  CHECK(a.mean_r.size() == 400);
  for (const auto& d : a.draws) {
    CHECK(check_stationarity(ModelSpec::log_linear(), d));
    CHECK(d.lambda0 > 0.0);
  }
  CHECK(a.acceptance_rate_theta() > 0.3);
  CHECK(a.acceptance_rate_lambda0() > 0.0);
}

TEST_CASE("prior-only chain matches rejection sampling from the truncated prior") {
  const CountSeries x({3});
  PriorSpec prior;
  prior.theta = GaussianPrior::diagonal({0.0, 0.4, 0.3}, {0.09, 0.09, 0.09});
  MhConfig cfg;
  cfg.iterations = 20000;
  cfg.burn_in = 1000;
  cfg.seed = 5;
  cfg.lambda0_proposal_shape = 1.0;
  cfg.lambda0_proposal_rate = 0.1;
  const ChainResult ch = run_chain(ModelSpec::log_linear(), prior, cfg, x, {0.0, 0.3, 0.3, 1.0});

  std::mt19937_64 gen(123);
  std::normal_distribution<double> z(0.0, 0.3);
  std::vector<double> ref[3];
  while (ref[0].size() < 200000) {
    const double a0 = z(gen), a1 = 0.4 + z(gen), b1 = 0.3 + z(gen);
    if (!oracle::loglinear_stationary(a1, b1)) continue;
    ref[0].push_back(a0);
    ref[1].push_back(a1);
    ref[2].push_back(b1);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    const auto col = chain_column(ch, j, cfg.burn_in);
    const auto ms = oracle::mean_se(col);
    const double e = ess(col).ess;
    const double sd = ms.se * std::sqrt(static_cast<double>(col.size()));
    const auto r = oracle::mean_se(ref[j]);
    CHECK(std::abs(ms.mean - r.mean) < 3.0 * std::sqrt(sd * sd / e + r.se * r.se));
  }
  const auto l0 = oracle::mean_se(chain_column(ch, 3, cfg.burn_in));
  CHECK(std::abs(l0.mean - 10.0) < 0.5);
}

TEST_CASE("state-dependent proposal beats a small random walk on A1") {
  const ModelSpec spec = ModelSpec::log_linear();
  const CountSeries x = simulate(spec, kA1, 400, 31);
  const PriorSpec prior = unit_prior();
  MhConfig cfg;
  cfg.iterations = 1500;
  cfg.burn_in = 500;
  cfg.update_lambda0 = false;
  const ChainResult ch = run_chain(spec, prior, cfg, x, kA1);

  Rng rng = make_rng(17);
  ParamVector state = kA1;
  double lp = log_posterior(spec, prior, state, x);
  std::size_t acc = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    ParamVector cand = state;
    cand.alpha0 += 0.05 * standard_normal(rng);
    cand.alpha1 += 0.05 * standard_normal(rng);
    cand.beta1 += 0.05 * standard_normal(rng);
    const double lc = log_posterior(spec, prior, cand, x);
    if (std::log(uniform_open(rng)) < lc - lp) {
      state = cand;
      lp = lc;
      ++acc;
    }
  }
  CHECK(ch.acceptance_rate_theta() > static_cast<double>(acc) / 1000.0);
  for (const auto& d : ch.draws) CHECK(d.lambda0 == kA1.lambda0);
}

TEST_CASE("blocked updates") {
  const ModelSpec spec = ModelSpec::log_linear();
  const CountSeries x = simulate(spec, kA1, 300, 13);
  MhConfig cfg;
  cfg.iterations = 3000;
  cfg.burn_in = 500;
  cfg.update_lambda0 = false;
  const ChainResult joint = run_chain(spec, unit_prior(), cfg, x, kA1);
  cfg.mode = UpdateMode::Blocked;
  const ChainResult blocked = run_chain(spec, unit_prior(), cfg, x, kA1);
  CHECK(blocked.acceptance_rate_theta() > 0.2);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto a = oracle::mean_se(chain_column(joint, j, cfg.burn_in));
    const auto b = oracle::mean_se(chain_column(blocked, j, cfg.burn_in));
    const double sd = a.se * std::sqrt(2500.0);
    CHECK(std::abs(a.mean - b.mean) < sd);
  }
}

TEST_CASE("frozen NB schedule") {
  const CountSeries x = simulate(ModelSpec::log_linear(), kA1, 200, 14);
  MhConfig cfg;
  cfg.iterations = 300;
  cfg.burn_in = 50;
  cfg.freeze_r_after = 100;
  const ChainResult ch = run_chain(ModelSpec::log_linear(), unit_prior(), cfg, x, kA1);
  for (std::size_t i = 101; i < 300; ++i) CHECK(ch.mean_r[i] == ch.mean_r[100]);
  bool varied = false;
  for (std::size_t i = 1; i < 100; ++i) varied = varied || ch.mean_r[i] != ch.mean_r[0];
  CHECK(varied);
}

TEST_CASE("sampler configuration checks") {
  const CountSeries x({1, 2, 3});
  MhConfig cfg;
  cfg.iterations = 10;
  cfg.burn_in = 10;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.burn_in = 2;
  CHECK_NOTHROW(cfg.validate());
  cfg.nb_tolerance = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.nb_tolerance = 0.1;
  cfg.lambda0_proposal_rate = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.lambda0_proposal_rate.reset();
  CHECK(cfg.lambda0_rate_for(x) == doctest::Approx(2.0 / 2.0));  // shape / mean(x)
  CHECK_THROWS_AS(run_chain(ModelSpec::log_linear(), unit_prior(), cfg, x, {0.1, 0.5, 0.6, 1.0}), ConfigError);
  CHECK_THROWS_AS(run_chain(ModelSpec::log_linear(), unit_prior(), cfg, x, {0.1, 0.2, 0.3, -1.0}), ConfigError);
  PriorSpec bad = unit_prior();
  bad.lambda0_rate = 0.0;
  CHECK_THROWS_AS(run_chain(ModelSpec::log_linear(), bad, cfg, x, kA1), ConfigError);
}
