#include "ingarch/config.hpp"

#include <fstream>
#include <set>

#include "ingarch/error.hpp"

namespace ingarch {
namespace {

using nlohmann::json;

// Object view that rejects keys outside the allowed set and checks value types.
class Obj {
 public:
  Obj(const json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) {
        std::string list;
        for (const auto& a : ok) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError(path_ + ": unknown key '" + k + "' (allowed: " + list + ")");
      }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string where(const char* key) const { return path_ + "." + key; }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }
  std::uint64_t uint(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw ConfigError(where(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }
  Eigen::Vector3d vec3(const char* key, const Eigen::Vector3d& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 3) throw ConfigError(where(key) + ": expected an array of 3 numbers");
    Eigen::Vector3d out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError(where(key) + ": expected an array of 3 numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

ParamVector parse_params(const json& j, const std::string& path, const ParamVector& base) {
  Obj o(j, path, {"alpha0", "alpha1", "beta1", "lambda0"});
  ParamVector p = base;
  p.alpha0 = o.number("alpha0", p.alpha0);
  p.alpha1 = o.number("alpha1", p.alpha1);
  p.beta1 = o.number("beta1", p.beta1);
  p.lambda0 = o.number("lambda0", p.lambda0);
  if (!(p.lambda0 > 0.0)) throw ConfigError(path + ".lambda0: must be positive");
  return p;
}

PriorSpec parse_prior(const json& j) {
  Obj o(j, "prior", {"mean", "cov_diag", "cov", "lambda0_shape", "lambda0_rate"});
  PriorSpec p;
  p.theta.mean = o.vec3("mean", Eigen::Vector3d::Zero());
  if (o.has("cov") && o.has("cov_diag")) throw ConfigError("prior: give either cov or cov_diag, not both");
  if (o.has("cov")) {
    const json& c = o.raw("cov");
    if (!c.is_array() || c.size() != 3) throw ConfigError("prior.cov: expected a 3x3 array");
    for (int i = 0; i < 3; ++i) {
      if (!c[i].is_array() || c[i].size() != 3) throw ConfigError("prior.cov: expected a 3x3 array");
      for (int k = 0; k < 3; ++k) {
        if (!c[i][k].is_number()) throw ConfigError("prior.cov: expected numbers");
        p.theta.cov(i, k) = c[i][k].get<double>();
      }
    }
  } else {
    p.theta.cov = o.vec3("cov_diag", Eigen::Vector3d::Ones()).asDiagonal();
  }
  p.lambda0_shape = o.number("lambda0_shape", p.lambda0_shape);
  p.lambda0_rate = o.number("lambda0_rate", p.lambda0_rate);
  p.validate();
  return p;
}

void parse_mh(const json& j, MhConfig& mh) {
  Obj o(j, "mh",
        {"iterations", "burn_in", "nb_tolerance", "lambda0_proposal_shape", "lambda0_proposal_rate",
         "include_prior_in_ratio", "mode", "update_lambda0", "fallback_scale", "full_jacobian", "freeze_r_after"});
  mh.iterations = o.uint("iterations", mh.iterations);
  mh.burn_in = o.uint("burn_in", mh.burn_in);
  mh.nb_tolerance = o.number("nb_tolerance", mh.nb_tolerance);
  mh.lambda0_proposal_shape = o.number("lambda0_proposal_shape", mh.lambda0_proposal_shape);
  if (o.has("lambda0_proposal_rate")) mh.lambda0_proposal_rate = o.number("lambda0_proposal_rate", 1.0);
  mh.include_prior_in_ratio = o.boolean("include_prior_in_ratio", mh.include_prior_in_ratio);
  const std::string mode = o.string("mode", mh.mode == UpdateMode::Joint ? "joint" : "blocked");
  if (mode == "joint")
    mh.mode = UpdateMode::Joint;
  else if (mode == "blocked")
    mh.mode = UpdateMode::Blocked;
  else
    throw ConfigError("mh.mode: expected joint or blocked");
  mh.update_lambda0 = o.boolean("update_lambda0", mh.update_lambda0);
  mh.fallback_scale = o.number("fallback_scale", mh.fallback_scale);
  mh.linearization.loglinear_full_jacobian = o.boolean("full_jacobian", mh.linearization.loglinear_full_jacobian);
  if (o.has("freeze_r_after")) mh.freeze_r_after = o.uint("freeze_r_after", 0);
  mh.validate();
}

void parse_psais(const json& j, PsaisConfig& ps) {
  Obj o(j, "psais",
        {"draws", "nb_tolerance", "gpd_fit", "lambda0", "initial_center", "overwrite_draws", "fallback_scale",
         "full_jacobian"});
  ps.draws = o.uint("draws", ps.draws);
  ps.nb_tolerance = o.number("nb_tolerance", ps.nb_tolerance);
  const std::string fit = o.string("gpd_fit", ps.gpd_method == GpdMethod::Profile ? "profile" : "ml");
  if (fit == "profile")
    ps.gpd_method = GpdMethod::Profile;
  else if (fit == "ml")
    ps.gpd_method = GpdMethod::MaximumLikelihood;
  else
    throw ConfigError("psais.gpd_fit: expected profile or ml");
  if (o.has("lambda0")) ps.lambda0 = o.number("lambda0", 1.0);
  if (o.has("initial_center")) ps.initial_center = o.vec3("initial_center", Eigen::Vector3d::Zero());
  ps.overwrite_draws = o.boolean("overwrite_draws", ps.overwrite_draws);
  ps.fallback_scale = o.number("fallback_scale", ps.fallback_scale);
  ps.linearization.loglinear_full_jacobian = o.boolean("full_jacobian", ps.linearization.loglinear_full_jacobian);
  ps.validate();
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  Obj o(doc, "config",
        {"scenario", "data", "out", "seed", "n", "replications", "workers", "model", "truth", "prior", "mh", "init",
         "psais", "forecast", "methods", "diagnose", "chain_start"});
  ExperimentConfig c;
  if (o.has("scenario")) c.scenario = o.string("scenario", "");
  if (o.has("data")) c.data = o.string("data", "");
  if (o.has("out")) c.out = o.string("out", "");
  c.seed = o.uint("seed", c.seed);
  c.n = o.uint("n", c.n);
  c.replications = o.uint("replications", c.replications);
  c.workers = o.uint("workers", c.workers);
  if (c.replications == 0) throw ConfigError("config.replications: must be at least 1");

  if (o.has("model")) {
    Obj m(o.raw("model"), "model", {"link", "softplus_scale"});
    c.model.link = parse_link(m.string("link", "loglinear"));
    c.model.softplus_scale = m.number("softplus_scale", 1.0);
    c.model.validate();
    c.model_set = true;
  }
  if (o.has("truth")) c.truth = parse_params(o.raw("truth"), "truth", ParamVector{});
  if (o.has("prior")) c.prior = parse_prior(o.raw("prior"));
  if (o.has("mh")) parse_mh(o.raw("mh"), c.mh);
  c.mh.seed = c.seed;
  if (o.has("init")) c.init = parse_params(o.raw("init"), "init", c.init);
  if (o.has("chain_start")) {
    const std::string s = o.string("chain_start", "mle");
    if (s != "mle" && s != "init") throw ConfigError("config.chain_start: expected mle or init");
    c.chain_start_mle = s == "mle";
  }
  if (o.has("psais")) parse_psais(o.raw("psais"), c.psais);
  c.psais.seed = c.seed;
  if (o.has("forecast")) {
    Obj f(o.raw("forecast"), "forecast", {"point_forecast", "max_draws"});
    const std::string pf = f.string("point_forecast", "draw_average");
    if (pf == "draw_average")
      c.forecast.point = PointForecast::DrawAverage;
    else if (pf == "plugin")
      c.forecast.point = PointForecast::Plugin;
    else
      throw ConfigError("forecast.point_forecast: expected draw_average or plugin");
    c.forecast.max_draws = f.uint("max_draws", c.forecast.max_draws);
    if (c.forecast.max_draws == 0) throw ConfigError("forecast.max_draws: must be positive");
  }
  if (o.has("methods")) {
    const json& m = o.raw("methods");
    if (!m.is_array() || m.empty()) throw ConfigError("config.methods: expected a non-empty array");
    c.methods.clear();
    for (const auto& v : m) {
      if (!v.is_string()) throw ConfigError("config.methods: expected strings");
      const auto s = v.get<std::string>();
      if (s != "mh" && s != "psais" && s != "mle")
        throw ConfigError("config.methods: unknown method '" + s + "' (expected mh, psais, mle)");
      c.methods.push_back(s);
    }
  }
  if (o.has("diagnose")) {
    Obj d(o.raw("diagnose"), "diagnose", {"fit_dir", "max_lag", "bins"});
    c.diagnose.fit_dir = d.string("fit_dir", "");
    c.diagnose.max_lag = d.uint("max_lag", c.diagnose.max_lag);
    c.diagnose.bins = d.uint("bins", c.diagnose.bins);
    if (c.diagnose.bins == 0) throw ConfigError("diagnose.bins: must be positive");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ModelSpec& spec) { return {{"link", to_string(spec.link)}, {"softplus_scale", spec.softplus_scale}}; }

json to_json(const ParamVector& p) {
  return {{"alpha0", p.alpha0}, {"alpha1", p.alpha1}, {"beta1", p.beta1}, {"lambda0", p.lambda0}};
}

json to_json(const PriorSpec& p) {
  json cov = json::array();
  for (int i = 0; i < 3; ++i) cov.push_back({p.theta.cov(i, 0), p.theta.cov(i, 1), p.theta.cov(i, 2)});
  return {{"mean", {p.theta.mean[0], p.theta.mean[1], p.theta.mean[2]}},
          {"cov", cov},
          {"lambda0_shape", p.lambda0_shape},
          {"lambda0_rate", p.lambda0_rate}};
}

json to_json(const ExperimentConfig& c) {
  json j;
  if (c.scenario) j["scenario"] = *c.scenario;
  if (c.data) j["data"] = *c.data;
  if (c.out) j["out"] = *c.out;
  j["seed"] = c.seed;
  j["n"] = c.n;
  j["replications"] = c.replications;
  j["workers"] = c.workers;
  if (c.model_set) j["model"] = to_json(c.model);
  if (c.truth) j["truth"] = to_json(*c.truth);
  if (c.prior) j["prior"] = to_json(*c.prior);
  json mh = {{"iterations", c.mh.iterations},
             {"burn_in", c.mh.burn_in},
             {"nb_tolerance", c.mh.nb_tolerance},
             {"lambda0_proposal_shape", c.mh.lambda0_proposal_shape},
             {"include_prior_in_ratio", c.mh.include_prior_in_ratio},
             {"mode", c.mh.mode == UpdateMode::Joint ? "joint" : "blocked"},
             {"update_lambda0", c.mh.update_lambda0},
             {"fallback_scale", c.mh.fallback_scale},
             {"full_jacobian", c.mh.linearization.loglinear_full_jacobian}};
  if (c.mh.lambda0_proposal_rate) mh["lambda0_proposal_rate"] = *c.mh.lambda0_proposal_rate;
  if (c.mh.freeze_r_after) mh["freeze_r_after"] = *c.mh.freeze_r_after;
  j["mh"] = mh;
  j["init"] = to_json(c.init);
  j["chain_start"] = c.chain_start_mle ? "mle" : "init";
  json ps = {{"draws", c.psais.draws},
             {"nb_tolerance", c.psais.nb_tolerance},
             {"gpd_fit", c.psais.gpd_method == GpdMethod::Profile ? "profile" : "ml"},
             {"overwrite_draws", c.psais.overwrite_draws},
             {"fallback_scale", c.psais.fallback_scale},
             {"full_jacobian", c.psais.linearization.loglinear_full_jacobian}};
  if (c.psais.lambda0) ps["lambda0"] = *c.psais.lambda0;
  if (c.psais.initial_center)
    ps["initial_center"] = {(*c.psais.initial_center)[0], (*c.psais.initial_center)[1], (*c.psais.initial_center)[2]};
  j["psais"] = ps;
  j["forecast"] = {{"point_forecast", c.forecast.point == PointForecast::Plugin ? "plugin" : "draw_average"},
                   {"max_draws", c.forecast.max_draws}};
  j["methods"] = c.methods;
  json d = {{"max_lag", c.diagnose.max_lag}, {"bins", c.diagnose.bins}};
  if (!c.diagnose.fit_dir.empty()) d["fit_dir"] = c.diagnose.fit_dir;
  j["diagnose"] = d;
  return j;
}

}  // namespace ingarch
