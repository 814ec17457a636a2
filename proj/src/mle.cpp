#include "ingarch/mle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

namespace ingarch {
namespace {

constexpr double kPenalty = 1e100;
constexpr double kSimplexShrink = 1.0 - 1e-9;
constexpr std::size_t kStallWindow = 200;
constexpr double kStallTolerance = 1e-12;  // per-observation negative log-likelihood

using U = std::array<double, 4>;

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct Problem {
  const ModelSpec* spec;
  const CountSeries* x;
  double scale;  // 1 / n, keeps gradients O(1)
  std::size_t evals = 0;
  std::size_t budget = 0;
  double best_value = std::numeric_limits<double>::infinity();
  U best_u{};

  ParamVector to_params(const U& u) const {
    ParamVector p;
    p.lambda0 = std::exp(u[3]);
    if (spec->link == Link::LogLinear) {
      p.alpha0 = u[0];
      p.alpha1 = std::tanh(u[1]);
      p.beta1 = (1.0 - p.alpha1) * logistic(u[2]);
    } else {
      p.alpha0 = std::exp(u[0]);
      const double m = std::max({u[1], u[2], 0.0});
      const double e1 = std::exp(u[1] - m), e2 = std::exp(u[2] - m), e3 = std::exp(-m);
      const double z = e1 + e2 + e3;
      p.alpha1 = kSimplexShrink * e1 / z;
      p.beta1 = kSimplexShrink * e2 / z;
    }
    return p;
  }

  U from_params(const ParamVector& p) const {
    U u{};
    u[3] = std::log(std::clamp(p.lambda0, 1e-8, 1e8));
    if (spec->link == Link::LogLinear) {
      u[0] = p.alpha0;
      const double a1 = std::clamp(p.alpha1, -0.999, 0.999);
      u[1] = std::atanh(a1);
      const double frac = std::clamp(p.beta1 / (1.0 - a1), 1e-6, 1.0 - 1e-6);
      u[2] = std::log(frac / (1.0 - frac));
    } else {
      u[0] = std::log(std::max(p.alpha0, 1e-6));
      double p1 = std::max(p.alpha1 / kSimplexShrink, 1e-6), p2 = std::max(p.beta1 / kSimplexShrink, 1e-6);
      double p3 = 1.0 - p1 - p2;
      if (p3 < 1e-6) {
        const double s = (1.0 - 1e-6) / (p1 + p2);
        p1 *= s;
        p2 *= s;
        p3 = 1e-6;
      }
      u[1] = std::log(p1 / p3);
      u[2] = std::log(p2 / p3);
    }
    return u;
  }

  double value(const U& u) {
    ++evals;
    double v = kPenalty;
    try {
      const double ll = log_likelihood(*spec, to_params(u), *x);
      if (std::isfinite(ll)) v = -ll * scale;
    } catch (const IntensityOverflow&) {
    }
    if (v < best_value) {
      best_value = v;
      best_u = u;
    }
    return v;
  }
};

U to_u(const gsl_vector* v) { return {gsl_vector_get(v, 0), gsl_vector_get(v, 1), gsl_vector_get(v, 2), gsl_vector_get(v, 3)}; }

double f_cb(const gsl_vector* v, void* params) { return static_cast<Problem*>(params)->value(to_u(v)); }

void df_cb(const gsl_vector* v, void* params, gsl_vector* g) {
  auto* pr = static_cast<Problem*>(params);
  const U u = to_u(v);
  for (int i = 0; i < 4; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(u[i]));
    U up = u, dn = u;
    up[i] += h;
    dn[i] -= h;
    const double fu = pr->value(up), fd = pr->value(dn);
    const double d = (fu - fd) / (2.0 * h);
    gsl_vector_set(g, i, std::isfinite(d) && std::abs(d) < 1e50 ? d : 0.0);
  }
}

void fdf_cb(const gsl_vector* v, void* params, double* f, gsl_vector* g) {
  *f = f_cb(v, params);
  df_cb(v, params, g);
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using VectorPtr = std::unique_ptr<gsl_vector, VectorDeleter>;

VectorPtr make_vector(const U& u) {
  VectorPtr v(gsl_vector_alloc(4));
  for (int i = 0; i < 4; ++i) gsl_vector_set(v.get(), i, u[i]);
  return v;
}

void quasi_newton(Problem& pr, const U& start) {
  gsl_multimin_function_fdf fn{&f_cb, &df_cb, &fdf_cb, 4, &pr};
  auto x0 = make_vector(start);
  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, 4);
  gsl_multimin_fdfminimizer_set(s, &fn, x0.get(), 0.05, 0.1);
  for (int it = 0; it < 500 && pr.evals < pr.budget / 2; ++it) {
    if (gsl_multimin_fdfminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_gradient(s->gradient, 1e-7) == GSL_SUCCESS) break;
  }
  gsl_multimin_fdfminimizer_free(s);
}

bool simplex(Problem& pr, const U& start) {
  gsl_multimin_function fn{&f_cb, 4, &pr};
  auto x0 = make_vector(start);
  auto step = make_vector({0.1, 0.1, 0.1, 0.5});
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4);
  gsl_multimin_fminimizer_set(s, &fn, x0.get(), step.get());
  // lambda0 is weakly identified and may drift towards a boundary along a flat valley, so the
  // size test alone can fail to trigger; a stalled objective also counts as converged.
  bool converged = false;
  double checkpoint = pr.best_value;
  for (std::size_t it = 1; pr.evals < pr.budget; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-9) == GSL_SUCCESS) {
      converged = true;
      break;
    }
    if (it % kStallWindow == 0) {
      if (checkpoint - pr.best_value < kStallTolerance) {
        converged = true;
        break;
      }
      checkpoint = pr.best_value;
    }
  }
  gsl_multimin_fminimizer_free(s);
  return converged;
}

}  // namespace

MleResult mle_fit(const ModelSpec& spec, const CountSeries& x, const ParamVector& init, const MleOptions& options) {
  spec.validate();
  if (!check_stationarity(spec, init)) throw ConfigError("mle_fit: initial point is not stationary");
  if (x.n() == 0) throw DataError("mle_fit: series has no modeled terms");

  // GSL's default handler aborts; errors surface through return codes instead.
  // Set once process-wide since the handler is global and fits may run concurrently.
  static std::once_flag gsl_quiet;
  std::call_once(gsl_quiet, [] { gsl_set_error_handler_off(); });

  Problem pr{&spec, &x, 1.0 / static_cast<double>(x.n())};
  pr.budget = options.max_evaluations;
  const U start = pr.from_params(init);
  pr.value(start);
  if (!options.simplex_only) quasi_newton(pr, start);
  const bool converged = simplex(pr, pr.best_u);

  MleResult res;
  res.params = pr.to_params(pr.best_u);
  res.log_lik = log_likelihood(spec, res.params, x);
  res.evaluations = pr.evals;
  if (!converged) throw MleNonConvergence("mle_fit: evaluation budget exhausted", res);
  return res;
}

}  // namespace ingarch
