// Command-line front end. Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ingarch/config.hpp"
#include "ingarch/error.hpp"
#include "ingarch/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<std::size_t> workers;
  std::string out, scenario, data, fit_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file");
  cmd->add_option("--seed", f.seed, "Base RNG seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--scenario", f.scenario, "Built-in scenario id (A1, A2, B1, B3)");
  cmd->add_option("--data", f.data, "CSV file with a 'count' column");
  cmd->add_option("--workers", f.workers, "Worker threads for replications (0 = all cores)");
  cmd->add_option("--n", f.n, "Series length for simulation");
}

ingarch::ExperimentConfig resolve(const CommonFlags& f) {
  ingarch::ExperimentConfig c = f.config.empty() ? ingarch::parse_config(nlohmann::json::object())
                                                 : ingarch::load_config(f.config);
  if (f.seed) {
    c.seed = *f.seed;
    c.mh.seed = *f.seed;
    c.psais.seed = *f.seed;
  }
  if (f.n) c.n = *f.n;
  if (f.workers) c.workers = *f.workers;
  if (!f.out.empty()) c.out = f.out;
  if (!f.scenario.empty()) {
    ingarch::scenario(f.scenario);  // validates the id
    c.scenario = f.scenario;
  }
  if (!f.data.empty()) c.data = f.data;
  if (!f.fit_dir.empty()) c.diagnose.fit_dir = f.fit_dir;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian Poisson INGARCH(1,1) estimation"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* sim = app.add_subcommand("simulate", "Simulate a count series");
  auto* fit_mh = app.add_subcommand("fit-mh", "Metropolis-Hastings posterior sampling");
  auto* fit_psais = app.add_subcommand("fit-psais", "Pareto-smoothed adaptive importance sampling");
  auto* fit_mle = app.add_subcommand("fit-mle", "Maximum-likelihood fit");
  auto* rep = app.add_subcommand("replicate", "Repeated simulate-and-fit study on a scenario");
  auto* diag = app.add_subcommand("diagnose", "Residual diagnostics and forecast metrics for a fit");
  for (auto* c : {sim, fit_mh, fit_psais, fit_mle, rep, diag}) add_common(c, flags);
  diag->add_option("--fit-dir", flags.fit_dir, "Directory written by a fit command (default: --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ingarch::ErrorKind::Config);
  }

  ingarch::init_logging();
  try {
    const ingarch::ExperimentConfig cfg = resolve(flags);
    if (sim->parsed()) {
      std::cout << ingarch::cmd_simulate(cfg).string() << "\n";
    } else if (fit_mh->parsed()) {
      std::cout << ingarch::cmd_fit(cfg, "mh").string() << "\n";
    } else if (fit_psais->parsed()) {
      std::cout << ingarch::cmd_fit(cfg, "psais").string() << "\n";
    } else if (fit_mle->parsed()) {
      std::cout << ingarch::cmd_fit(cfg, "mle").string() << "\n";
    } else if (rep->parsed()) {
      const auto report = ingarch::cmd_replicate(cfg);
      std::size_t failed = 0;
      for (const auto& r : report.rows) failed += !r.ok;
      std::cout << *cfg.out << " (" << report.rows.size() - failed << " fits, " << failed << " failed)\n";
    } else if (diag->parsed()) {
      std::cout << ingarch::cmd_diagnose(cfg).string() << "\n";
    }
  } catch (const ingarch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ingarch::ErrorKind::Config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ingarch::ErrorKind::Numerical);
  }
  return 0;
}
