#include "ingarch/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ingarch/error.hpp"
#include "ingarch/io.hpp"
#include "ingarch/mle.hpp"
#include "ingarch/rng.hpp"

namespace ingarch {

namespace fs = std::filesystem;
using nlohmann::json;

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("ingarch");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] [%l] %v");
    const char* env = std::getenv("INGARCH_LOG");
    const auto level = env ? spdlog::level::from_str(env) : spdlog::level::warn;
    // from_str maps unknown names to off; treat those as the default instead.
    const bool known = env && (std::string(env) == "off" || level != spdlog::level::off);
    spdlog::set_level(known ? level : spdlog::level::warn);
  });
}

PriorSpec default_prior(Link link) {
  PriorSpec p;
  const double v = link == Link::LogLinear ? 1.0 : 0.15 * 0.15;
  p.theta = GaussianPrior::diagonal(Eigen::Vector3d::Zero(), Eigen::Vector3d::Constant(v));
  return p;
}

const std::vector<Scenario>& scenarios() {
  static const std::vector<Scenario> table = [] {
    const ModelSpec ll = ModelSpec::log_linear(), sp = ModelSpec::softplus(1.0);
    return std::vector<Scenario>{
        {"A1", ll, {0.3, 0.2, 0.6, 3.0}, default_prior(Link::LogLinear)},
        {"A2", ll, {0.2, 0.3, 0.4, 3.0}, default_prior(Link::LogLinear)},
        {"B1", sp, {0.3, 0.4, 0.25, 1.0}, default_prior(Link::Softplus)},
        {"B3", sp, {0.25, 0.35, 0.4, 1.0}, default_prior(Link::Softplus)},
    };
  }();
  return table;
}

const Scenario& scenario(const std::string& id) {
  for (const auto& s : scenarios())
    if (s.id == id) return s;
  std::string ids;
  for (const auto& s : scenarios()) ids += (ids.empty() ? "" : ", ") + s.id;
  throw ConfigError("unknown scenario '" + id + "' (valid: " + ids + ")");
}

std::uint64_t replication_data_seed(std::uint64_t seed, std::size_t rep) { return derive_seed(seed, rep, 0); }
std::uint64_t replication_fit_seed(std::uint64_t seed, std::size_t rep) { return derive_seed(seed, rep, 1); }

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

double param_at(const ParamVector& p, std::size_t j) {
  return j == 0 ? p.alpha0 : j == 1 ? p.alpha1 : j == 2 ? p.beta1 : p.lambda0;
}

ParamVector posterior_mean(const ChainResult& chain, std::size_t burn_in) {
  ParamVector m{0, 0, 0, 0};
  const double k = static_cast<double>(chain.size() - burn_in);
  for (std::size_t i = burn_in; i < chain.size(); ++i) {
    m.alpha0 += chain.draws[i].alpha0 / k;
    m.alpha1 += chain.draws[i].alpha1 / k;
    m.beta1 += chain.draws[i].beta1 / k;
    m.lambda0 += chain.draws[i].lambda0 / k;
  }
  return m;
}

}  // namespace

ParamVector chain_start(const ModelSpec& spec, const CountSeries& x, const ParamVector& init, bool at_mle) {
  if (!at_mle || x.n() == 0) return init;
  ParamVector p;
  try {
    p = mle_fit(spec, x, init).params;
  } catch (const MleNonConvergence& e) {
    p = e.best().params;
  } catch (const NumericalError& e) {
    spdlog::warn("chain start: MLE failed ({}); using init", e.what());
    return init;
  }
  // The likelihood is nearly flat in lambda0, so its MLE can sit at a boundary where the
  // independence proposal has almost no mass.
  p.lambda0 = init.lambda0;
  return check_stationarity(spec, p) ? p : init;
}

namespace {

ReplicationRow run_method(const std::string& method, const Scenario& sc, const ReplicateSettings& st,
                          const CountSeries& x, std::size_t rep) {
  ReplicationRow row;
  row.rep = rep;
  row.method = method;
  try {
    if (method == "mh") {
      MhConfig mh = st.mh;
      mh.seed = replication_fit_seed(st.seed, rep);
      const ChainResult chain =
          run_chain(sc.spec, sc.prior, mh, x, chain_start(sc.spec, x, st.init, st.chain_start_mle));
      row.estimate = posterior_mean(chain, mh.burn_in);
      row.extra = chain.acceptance_rate_theta();
    } else if (method == "psais") {
      PsaisConfig ps = st.psais;
      ps.seed = replication_fit_seed(st.seed, rep);
      const PsaisResult r = psais_run(sc.spec, sc.prior, ps, x);
      row.estimate = ParamVector::from_theta(r.estimate.head<3>(), r.lambda0);
      row.extra = r.gpd.k_hat;
    } else if (method == "mle") {
      try {
        const MleResult r = mle_fit(sc.spec, x, st.init);
        row.estimate = r.params;
        row.extra = r.log_lik;
      } catch (const MleNonConvergence& e) {
        row.estimate = e.best().params;
        row.extra = e.best().log_lik;
        row.error = e.what();
      }
    } else {
      throw ConfigError("unknown method '" + method + "'");
    }
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<TableRow> aggregate(const std::vector<ReplicationRow>& rows, const ParamVector& truth,
                                const std::vector<std::string>& methods) {
  std::vector<TableRow> table;
  for (const auto& m : methods) {
    for (std::size_t j = 0; j < 3; ++j) {
      TableRow t;
      t.method = m;
      t.parameter = kParamNames[j];
      t.truth = param_at(truth, j);
      double sum = 0, sq = 0, ab = 0;
      for (const auto& r : rows) {
        if (r.method != m || !r.ok) continue;
        const double e = param_at(r.estimate, j);
        sum += e;
        sq += (e - t.truth) * (e - t.truth);
        ab += std::abs(e - t.truth);
        ++t.reps;
      }
      if (t.reps > 0) {
        const double k = static_cast<double>(t.reps);
        t.estimate = sum / k;
        t.rmse = std::sqrt(sq / k);
        t.mad = ab / k;
      } else {
        t.estimate = t.rmse = t.mad = std::nan("");
      }
      table.push_back(t);
    }
  }
  return table;
}

ReplicateReport replicate(const Scenario& sc, const ReplicateSettings& st) {
  if (st.replications == 0) throw ConfigError("replications must be at least 1");
  for (const auto& m : st.methods)
    if (m != "mh" && m != "psais" && m != "mle") throw ConfigError("unknown method '" + m + "'");
  std::vector<std::vector<ReplicationRow>> per_rep(st.replications);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t rep; (rep = next.fetch_add(1)) < st.replications;) {
      std::vector<ReplicationRow> rows;
      try {
        const CountSeries x = simulate(sc.spec, sc.truth, st.n, replication_data_seed(st.seed, rep));
        for (const auto& m : st.methods) rows.push_back(run_method(m, sc, st, x, rep));
      } catch (const std::exception& e) {
        for (const auto& m : st.methods) rows.push_back({rep, m, false, e.what(), {}, 0.0});
      }
      for (const auto& r : rows)
        if (!r.ok) spdlog::warn("replication {} ({}) failed: {}", rep, r.method, r.error);
      spdlog::info("{} replication {}/{} done", sc.id, rep + 1, st.replications);
      per_rep[rep] = std::move(rows);
    }
  };
  const std::size_t nw = std::min(resolve_workers(st.workers), st.replications);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < nw; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ReplicateReport report;
  for (auto& v : per_rep)
    for (auto& r : v) report.rows.push_back(std::move(r));
  report.table = aggregate(report.rows, sc.truth, st.methods);
  return report;
}

// ---------------------------------------------------------------------------
// Subcommands

namespace {

fs::path require_out(const ExperimentConfig& c) {
  if (!c.out || c.out->empty()) throw ConfigError("an output directory is required (--out or config.out)");
  fs::create_directories(*c.out);
  return *c.out;
}

ModelSpec resolve_spec(const ExperimentConfig& c) {
  if (c.model_set) return c.model;
  if (c.scenario) return scenario(*c.scenario).spec;
  return ModelSpec::log_linear();
}

PriorSpec resolve_prior(const ExperimentConfig& c, const ModelSpec& spec) {
  if (c.prior) return *c.prior;
  if (c.scenario) return scenario(*c.scenario).prior;
  return default_prior(spec.link);
}

json summary_json(const ParameterSummary& p) {
  return {{"mean", p.mean}, {"sd", p.sd},   {"q025", p.q025},
          {"q50", p.q50},   {"q975", p.q975}, {"ess", p.ess}, {"ess_degenerate", p.ess_degenerate}};
}

void write_plot_data(const fs::path& dir, const ChainResult& chain, const PosteriorSummary& s, std::size_t burn_in,
                     std::size_t max_lag) {
  for (std::size_t j = 0; j < 4; ++j) {
    const std::string name = kParamNames[j];
    {
      CsvWriter w(dir / ("trace_" + name + ".csv"), {"iter", "value"});
      for (std::size_t i = 0; i < chain.size(); ++i)
        w.row(std::vector<std::string>{std::to_string(i), format_double(param_at(chain.draws[i], j))});
    }
    {
      CsvWriter w(dir / ("running_mean_" + name + ".csv"), {"iter", "value"});
      const auto& rm = s.params[j].running_mean;
      for (std::size_t i = 0; i < rm.size(); ++i)
        w.row(std::vector<std::string>{std::to_string(burn_in + i), format_double(rm[i])});
    }
    const std::vector<double> col = chain_column(chain, j, burn_in);
    {
      const DensityGrid g = kernel_density(col);
      CsvWriter w(dir / ("density_" + name + ".csv"), {"x", "density"});
      for (std::size_t i = 0; i < g.x.size(); ++i) w.row(std::vector<double>{g.x[i], g.density[i]});
    }
    if (col.size() > 1) {
      try {
        const auto r = acf(col, std::min(max_lag, col.size() - 1));
        CsvWriter w(dir / ("acf_" + name + ".csv"), {"lag", "rho"});
        for (std::size_t k = 0; k < r.size(); ++k) w.row(std::vector<std::string>{std::to_string(k), format_double(r[k])});
      } catch (const NumericalError&) {
        spdlog::info("skipping ACF plot data for constant parameter {}", name);
      }
    }
  }
}

void write_fit_record(const fs::path& out, const std::string& method, const ModelSpec& spec, const fs::path& data,
                      const ParamVector& point, std::size_t burn_in) {
  json j = {{"method", method},
            {"model", to_json(spec)},
            {"data", fs::absolute(data).lexically_normal().string()},
            {"data_git_blob_sha1", git_blob_hash(read_file(data))},
            {"point", to_json(point)},
            {"burn_in", burn_in}};
  write_json(out / "fit.json", j);
}

ParamVector params_from_json(const json& j) {
  return {j.at("alpha0").get<double>(), j.at("alpha1").get<double>(), j.at("beta1").get<double>(),
          j.at("lambda0").get<double>()};
}

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, const std::vector<std::string>& expect) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0, line_no = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t s = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
      if (i == line.size() || line[i] == ',') {
        cells.push_back(line.substr(s, i - s));
        s = i + 1;
      }
    if (header) {
      if (cells != expect) throw DataError(path.string() + ":1: unexpected header");
      header = false;
      continue;
    }
    if (cells.size() != expect.size()) throw DataError(path.string() + ":" + std::to_string(line_no) + ": wrong field count");
    std::vector<double> v;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double d = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number");
      v.push_back(d);
    }
    rows.push_back(std::move(v));
  }
  return rows;
}

const std::vector<std::string> kChainHeader{"iter", "alpha0", "alpha1", "beta1", "lambda0", "acc_theta", "acc_l0"};
const std::vector<std::string> kWeightsHeader{"s",         "alpha0",    "alpha1",         "beta1",
                                              "log_ratio", "raw_ratio", "smoothed_weight"};

}  // namespace

fs::path cmd_simulate(const ExperimentConfig& c) {
  const fs::path out = require_out(c);
  ModelSpec spec = resolve_spec(c);
  ParamVector truth;
  if (c.truth) {
    truth = *c.truth;
  } else if (c.scenario) {
    truth = scenario(*c.scenario).truth;
  } else {
    throw ConfigError("simulate needs a scenario or explicit truth parameters");
  }
  const CountSeries x = simulate(spec, truth, c.n, c.seed);
  const fs::path series = out / "series.csv";
  write_counts_csv(series, x);
  json meta = {{"seed", c.seed}, {"n", c.n}, {"model", to_json(spec)}, {"params", to_json(truth)}};
  if (c.scenario) meta["scenario"] = *c.scenario;
  write_json(out / "metadata.json", meta);
  write_manifest(out, to_json(c), {});
  spdlog::info("simulated {} counts into {}", x.size(), series.string());
  return series;
}

fs::path cmd_fit(const ExperimentConfig& c, const std::string& method) {
  if (!c.data) throw ConfigError("fit needs a data file (--data or config.data)");
  const fs::path out = require_out(c);
  const CountSeries x = read_counts_csv(*c.data);
  const ModelSpec spec = resolve_spec(c);
  const PriorSpec prior = resolve_prior(c, spec);
  if (!check_stationarity(spec, c.init)) throw ConfigError("init parameters are not stationary for the chosen link");

  if (method == "mh") {
    MhConfig mh = c.mh;
    mh.seed = c.seed;
    const ChainResult chain = run_chain(spec, prior, mh, x, chain_start(spec, x, c.init, c.chain_start_mle));
    {
      CsvWriter w(out / "chain.csv", kChainHeader);
      for (std::size_t i = 0; i < chain.size(); ++i) {
        const ParamVector& p = chain.draws[i];
        w.row(std::vector<std::string>{std::to_string(i), format_double(p.alpha0), format_double(p.alpha1),
                                       format_double(p.beta1), format_double(p.lambda0),
                                       std::to_string(chain.accepted_theta[i]), std::to_string(chain.accepted_lambda0[i])});
      }
    }
    const PosteriorSummary s = posterior_summary(chain, mh.burn_in);
    json params;
    for (const auto& p : s.params) params[p.name] = summary_json(p);
    double mean_r = 0.0;
    for (double r : chain.mean_r) mean_r += r / static_cast<double>(chain.mean_r.size());
    write_json(out / "summary.json", {{"method", "mh"},
                                      {"seed", chain.seed},
                                      {"iterations", mh.iterations},
                                      {"burn_in", mh.burn_in},
                                      {"acceptance_rate", s.acceptance_rate},
                                      {"acceptance_rate_lambda0", s.acceptance_rate_lambda0},
                                      {"fallback_proposals", chain.fallback_proposals},
                                      {"mean_r", mean_r},
                                      {"params", params}});
    write_plot_data(out / "plots", chain, s, mh.burn_in, c.diagnose.max_lag);
    write_fit_record(out, "mh", spec, *c.data, posterior_mean(chain, mh.burn_in), mh.burn_in);
  } else if (method == "psais") {
    PsaisConfig ps = c.psais;
    ps.seed = c.seed;
    const PsaisResult r = psais_run(spec, prior, ps, x);
    {
      CsvWriter w(out / "weights.csv", kWeightsHeader);
      for (std::size_t s = 0; s < r.draws.size(); ++s)
        w.row(std::vector<std::string>{std::to_string(s), format_double(r.draws[s][0]), format_double(r.draws[s][1]),
                                       format_double(r.draws[s][2]), format_double(r.log_raw_ratios[s]),
                                       format_double(r.raw_ratios[s]), format_double(r.smoothed_weights[s])});
    }
    json est = json::array(), se = json::array();
    for (Eigen::Index i = 0; i < r.estimate.size(); ++i) {
      est.push_back(r.estimate[i]);
      se.push_back(r.weighted_se[i]);
    }
    write_json(out / "summary.json", {{"method", "psais"},
                                      {"seed", ps.seed},
                                      {"draws", ps.draws},
                                      {"k_hat", r.gpd.k_hat},
                                      {"sigma_hat", r.gpd.sigma_hat},
                                      {"tail_size", r.gpd.m},
                                      {"tail_smoothed", r.tail_smoothed},
                                      {"khat_threshold", r.khat_threshold},
                                      {"khat_flag", r.khat_flag},
                                      {"estimate", est},
                                      {"weighted_se", se},
                                      {"is_ess", r.is_ess},
                                      {"lambda0", r.lambda0},
                                      {"fallback_proposals", r.fallback_proposals}});
    write_fit_record(out, "psais", spec, *c.data, ParamVector::from_theta(r.estimate.head<3>(), r.lambda0), 0);
  } else if (method == "mle") {
    MleResult r;
    bool converged = true;
    try {
      r = mle_fit(spec, x, c.init);
    } catch (const MleNonConvergence& e) {
      spdlog::warn("{}", e.what());
      r = e.best();
      converged = false;
    }
    write_json(out / "summary.json", {{"method", "mle"},
                                      {"params", to_json(r.params)},
                                      {"log_lik", r.log_lik},
                                      {"evaluations", r.evaluations},
                                      {"converged", converged}});
    write_fit_record(out, "mle", spec, *c.data, r.params, 0);
  } else {
    throw ConfigError("unknown fit method '" + method + "' (expected mh, psais, mle)");
  }
  write_manifest(out, to_json(c), {*c.data});
  return out;
}

ReplicateReport cmd_replicate(const ExperimentConfig& c) {
  if (!c.scenario) throw ConfigError("replicate needs a scenario (--scenario or config.scenario)");
  const fs::path out = require_out(c);
  Scenario sc = scenario(*c.scenario);
  if (c.model_set) sc.spec = c.model;
  if (c.truth) sc.truth = *c.truth;
  if (c.prior) sc.prior = *c.prior;

  ReplicateSettings st;
  st.replications = c.replications;
  st.n = c.n;
  st.seed = c.seed;
  st.workers = c.workers;
  st.methods = c.methods;
  st.mh = c.mh;
  st.init = c.init;
  st.chain_start_mle = c.chain_start_mle;
  st.psais = c.psais;
  const ReplicateReport rep = replicate(sc, st);

  {
    CsvWriter w(out / "replications.csv", {"rep", "method", "ok", "alpha0", "alpha1", "beta1", "lambda0", "extra"});
    for (const auto& r : rep.rows)
      w.row(std::vector<std::string>{std::to_string(r.rep), r.method, r.ok ? "1" : "0", format_double(r.estimate.alpha0),
                                     format_double(r.estimate.alpha1), format_double(r.estimate.beta1),
                                     format_double(r.estimate.lambda0), format_double(r.extra)});
  }
  {
    CsvWriter w(out / "table.csv", {"method", "parameter", "truth", "estimate", "rmse", "mad", "reps"});
    for (const auto& t : rep.table)
      w.row(std::vector<std::string>{t.method, t.parameter, format_double(t.truth), format_double(t.estimate),
                                     format_double(t.rmse), format_double(t.mad), std::to_string(t.reps)});
  }
  json failures = json::array();
  for (const auto& r : rep.rows)
    if (!r.ok) failures.push_back({{"rep", r.rep}, {"method", r.method}, {"error", r.error}});
  write_json(out / "summary.json", {{"scenario", sc.id}, {"replications", st.replications}, {"failures", failures}});
  write_manifest(out, to_json(c), {});
  return rep;
}

fs::path cmd_diagnose(const ExperimentConfig& c) {
  const fs::path out = require_out(c);
  const fs::path fit_dir = c.diagnose.fit_dir.empty() ? out : fs::path(c.diagnose.fit_dir);
  const fs::path record = fit_dir / "fit.json";
  if (!fs::exists(record)) throw DataError("diagnose: missing " + record.string() + " (run a fit command first)");
  const json fit = read_json(record);
  const std::string method = fit.at("method").get<std::string>();
  ModelSpec spec;
  spec.link = parse_link(fit.at("model").at("link").get<std::string>());
  spec.softplus_scale = fit.at("model").at("softplus_scale").get<double>();
  const fs::path data = fit.at("data").get<std::string>();
  if (!fs::exists(data)) throw DataError("diagnose: data file " + data.string() + " named in fit.json is missing");
  const CountSeries x = read_counts_csv(data);
  const ParamVector point = params_from_json(fit.at("point"));

  std::vector<ParamVector> draws;
  if (method == "mh") {
    const fs::path chain = fit_dir / "chain.csv";
    if (!fs::exists(chain)) throw DataError("diagnose: missing " + chain.string());
    const auto rows = read_numeric_csv(chain, kChainHeader);
    const std::size_t burn = fit.at("burn_in").get<std::size_t>();
    for (std::size_t i = burn; i < rows.size(); ++i) draws.push_back({rows[i][1], rows[i][2], rows[i][3], rows[i][4]});
  } else if (method == "psais") {
    const fs::path weights = fit_dir / "weights.csv";
    if (!fs::exists(weights)) throw DataError("diagnose: missing " + weights.string());
    const auto rows = read_numeric_csv(weights, kWeightsHeader);
    // Systematic resampling into 1000 equally weighted draws.
    constexpr std::size_t kDraws = 1000;
    double cum = 0.0;
    std::size_t i = 0;
    for (std::size_t k = 0; k < kDraws && !rows.empty(); ++k) {
      const double u = (static_cast<double>(k) + 0.5) / kDraws;
      while (i + 1 < rows.size() && cum + rows[i][6] < u) cum += rows[i++][6];
      draws.push_back({rows[i][1], rows[i][2], rows[i][3], point.lambda0});
    }
  } else {
    draws.push_back(point);
  }
  if (draws.empty()) throw DataError("diagnose: no posterior draws found in " + fit_dir.string());

  const std::vector<double> res = pearson_residuals(spec, point, x);
  {
    CsvWriter w(out / "residuals.csv", {"t", "residual"});
    for (std::size_t i = 0; i < res.size(); ++i) w.row(std::vector<std::string>{std::to_string(i + 1), format_double(res[i])});
  }
  if (res.size() > 1) {
    const auto r = acf(res, std::min(c.diagnose.max_lag, res.size() - 1));
    CsvWriter w(out / "residual_acf.csv", {"lag", "rho"});
    for (std::size_t k = 0; k < r.size(); ++k) w.row(std::vector<std::string>{std::to_string(k), format_double(r[k])});
  }
  {
    const Histogram h = histogram(res, c.diagnose.bins);
    CsvWriter w(out / "residual_hist.csv", {"lo", "hi", "count"});
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      w.row(std::vector<std::string>{format_double(h.edges[b]), format_double(h.edges[b + 1]), std::to_string(h.counts[b])});
  }
  const ForecastReport f = forecast_metrics(spec, draws, x, c.forecast);
  write_json(out / "metrics.json", {{"mae", f.mae}, {"rmse", f.rmse}, {"lpd", f.lpd}, {"draws_used", f.draws_used}});
  write_manifest(out, to_json(c), {data, record});
  return out;
}

}  // namespace ingarch
