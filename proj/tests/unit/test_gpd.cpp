#include <algorithm>
#include <cmath>
#include <numeric>

#include <doctest.h>

#include "ingarch/gpd.hpp"
#include "oracles.hpp"

using namespace ingarch;

TEST_CASE("GPD fit recovers known tails") {
  SUBCASE("exponential data has shape near zero") {
    const auto y = oracle::gpd_sample(0.0, 2.0, 5000, 1);
    const GpdFit f = fit_gpd(y);
    CHECK(std::abs(f.k_hat) < 0.05);
    CHECK(f.sigma_hat == doctest::Approx(2.0).epsilon(0.06));
    CHECK(f.m == 5000);
  }
  SUBCASE("GPD(0.5, 1)") {
    for (const GpdMethod m : {GpdMethod::Profile, GpdMethod::MaximumLikelihood}) {
      const auto y = oracle::gpd_sample(0.5, 1.0, 5000, 2);
      const GpdFit f = fit_gpd(y, m);
      CHECK(std::abs(f.k_hat - 0.5) < 0.1);
      CHECK(std::abs(f.sigma_hat - 1.0) < 0.1);
    }
  }
  SUBCASE("light tail") {
    const GpdFit f = fit_gpd(oracle::gpd_sample(-0.3, 1.0, 5000, 3));
    CHECK(std::abs(f.k_hat + 0.3) < 0.1);
  }
  SUBCASE("the two estimators agree on large samples") {
    const auto y = oracle::gpd_sample(0.3, 0.7, 20000, 4);
    CHECK(fit_gpd(y, GpdMethod::Profile).k_hat ==
          doctest::Approx(fit_gpd(y, GpdMethod::MaximumLikelihood).k_hat).epsilon(0.05));
  }
  SUBCASE("input checks") {
    CHECK_THROWS_AS(fit_gpd(std::vector<double>(10, 0.3)), DegenerateTail);
    CHECK_THROWS_AS(fit_gpd(std::vector<double>{1, 2, 3}), ConfigError);
  }
}

TEST_CASE("GPD quantiles") {
  CHECK(gpd_quantile(1.0 - std::exp(-1.0), 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gpd_quantile(0.0, 0.4, 2.0, 3.0) == 3.0);
  // F(y) = 1 - (1 + k y / sigma)^(-1/k) inverted by hand at p = 0.75, k = 0.5, sigma = 2.
  CHECK(gpd_quantile(0.75, 0.5, 2.0) == doctest::Approx(2.0 * (std::pow(0.25, -0.5) - 1.0) / 0.5));
  double prev = -1.0;
  for (double p = 0.0; p < 1.0; p += 0.05) {
    const double q = gpd_quantile(p, 0.2, 1.0);
    CHECK(q > prev);
    prev = q;
  }
}

TEST_CASE("tail size and shape threshold") {
  CHECK(pareto_tail_size(5000) == 212);
  CHECK(pareto_tail_size(100) == 20);
  CHECK(pareto_tail_size(10000) == 300);
  CHECK(khat_threshold(5000) == 0.7);
  CHECK(khat_threshold(10) == doctest::Approx(0.0));
  CHECK(khat_threshold(100) == doctest::Approx(0.5));
  CHECK_THROWS_AS(khat_threshold(9), ConfigError);
}

TEST_CASE("Pareto smoothing") {
  SUBCASE("equal ratios pass through") {
    const std::vector<double> r(500, 0.25);
    const SmoothedRatios s = pareto_smooth(r);
    CHECK_FALSE(s.smoothed);
    CHECK(s.weights == r);
  }
  SUBCASE("only the tail changes, order is kept and the maximum caps it") {
    const std::vector<double> r = oracle::gpd_sample(0.6, 1.0, 2000, 9);
    const SmoothedRatios s = pareto_smooth(r);
    REQUIRE(s.smoothed);
    const std::size_t m = pareto_tail_size(r.size());
    std::vector<std::size_t> idx(r.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r[a] < r[b]; });
    const double rmax = r[idx.back()];
    for (std::size_t i = 0; i + m < r.size(); ++i) CHECK(s.weights[idx[i]] == r[idx[i]]);
    for (std::size_t i = r.size() - m; i + 1 < r.size(); ++i) {
      CHECK(s.weights[idx[i]] <= s.weights[idx[i + 1]]);
      CHECK(s.weights[idx[i]] >= r[idx[r.size() - m - 1]]);
    }
    for (double w : s.weights) CHECK(w <= rmax);
    CHECK(s.gpd.k_hat > 0.3);
    CHECK(s.gpd.location_u == r[idx[r.size() - m - 1]]);
  }
  SUBCASE("input checks") {
    CHECK_THROWS_AS(pareto_smooth(std::vector<double>(24, 1.0)), ConfigError);
    std::vector<double> bad(100, 1.0);
    bad[3] = -1.0;
    CHECK_THROWS_AS(pareto_smooth(bad), ConfigError);
    bad[3] = INFINITY;
    CHECK_THROWS_AS(pareto_smooth(bad), ConfigError);
  }
}
