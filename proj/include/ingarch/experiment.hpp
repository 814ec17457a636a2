#pragma once

// Built-in simulation scenarios, replication driver, and the subcommand implementations
// behind tools/ingarch.

#include <filesystem>
#include <string>
#include <vector>

#include "ingarch/config.hpp"
#include "ingarch/diagnostics.hpp"
#include "ingarch/forecast.hpp"
#include "ingarch/mh_sampler.hpp"
#include "ingarch/psais.hpp"

namespace ingarch {

struct Scenario {
  std::string id;
  ModelSpec spec;
  ParamVector truth;
  PriorSpec prior;
};

/// A1, A2, B1, B3. Throws ConfigError listing the valid ids otherwise.
const Scenario& scenario(const std::string& id);
const std::vector<Scenario>& scenarios();

/// b = 0 with diag(1) for log-linear scenarios, diag(0.15^2) for softplus; Gamma(1, 0.1) on lambda0.
PriorSpec default_prior(Link link);

struct ReplicateSettings {
  std::size_t replications = 20;
  std::size_t n = 800;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  std::vector<std::string> methods{"mh", "mle"};
  MhConfig mh;
  ParamVector init;
  bool chain_start_mle = true;
  PsaisConfig psais;
};

struct ReplicationRow {
  std::size_t rep = 0;
  std::string method;
  bool ok = false;
  std::string error;
  ParamVector estimate;
  /// MH: theta acceptance rate. PSAIS: k-hat. MLE: log-likelihood.
  double extra = 0.0;
};

struct TableRow {
  std::string method;
  std::string parameter;
  double truth = 0.0;
  double estimate = 0.0;  // mean over successful replications
  double rmse = 0.0;
  double mad = 0.0;
  std::size_t reps = 0;
};

struct ReplicateReport {
  std::vector<ReplicationRow> rows;  // ordered by (rep, method)
  std::vector<TableRow> table;
};

/// Seed of the simulated series for replication `rep`.
std::uint64_t replication_data_seed(std::uint64_t seed, std::size_t rep);
/// Seed of the sampler run for replication `rep`.
std::uint64_t replication_fit_seed(std::uint64_t seed, std::size_t rep);

/// RMSE = sqrt(mean (est - truth)^2) and MAD = mean |est - truth| over successful rows.
std::vector<TableRow> aggregate(const std::vector<ReplicationRow>& rows, const ParamVector& truth,
                                const std::vector<std::string>& methods);

/// Runs replications on a worker pool. A failing replication is recorded, not rethrown.
ReplicateReport replicate(const Scenario& sc, const ReplicateSettings& settings);

/// MH starting point. With `at_mle`, theta comes from an MLE fit started at `init` and lambda0
/// stays at init.lambda0; a failed or non-stationary fit falls back to `init`.
ParamVector chain_start(const ModelSpec& spec, const CountSeries& x, const ParamVector& init, bool at_mle);

/// Worker count for `requested` (0 = hardware concurrency).
std::size_t resolve_workers(std::size_t requested);

// Subcommands. Each writes into config.out (required) and a manifest.json.
std::filesystem::path cmd_simulate(const ExperimentConfig& config);
std::filesystem::path cmd_fit(const ExperimentConfig& config, const std::string& method);
ReplicateReport cmd_replicate(const ExperimentConfig& config);
std::filesystem::path cmd_diagnose(const ExperimentConfig& config);

/// Installs a stderr logger whose level comes from INGARCH_LOG
/// (trace, debug, info, warn, error, off; default warn).
void init_logging();

}  // namespace ingarch
