#pragma once

// Experiment configuration documents. Parsing is strict: unknown keys and wrongly typed
// values raise ConfigError before any computation starts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ingarch/forecast.hpp"
#include "ingarch/mh_sampler.hpp"
#include "ingarch/psais.hpp"

namespace ingarch {

struct DiagnoseSettings {
  std::string fit_dir;
  std::size_t max_lag = 40;
  std::size_t bins = 30;
};

struct ExperimentConfig {
  std::optional<std::string> scenario;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::uint64_t seed = 1;
  std::size_t n = 800;
  std::size_t replications = 20;
  /// 0 selects the available hardware parallelism.
  std::size_t workers = 0;

  ModelSpec model;
  bool model_set = false;
  /// Simulation parameters when no scenario is given.
  std::optional<ParamVector> truth;
  std::optional<PriorSpec> prior;
  MhConfig mh;
  ParamVector init;  // chain and MLE starting point
  /// Start the chain's theta at the MLE (init supplies lambda0 and the optimizer start).
  bool chain_start_mle = true;
  PsaisConfig psais;
  ForecastOptions forecast;
  std::vector<std::string> methods{"mh", "mle"};
  DiagnoseSettings diagnose;
};

/// Throws ConfigError on any schema violation.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Canonical document; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

nlohmann::json to_json(const ModelSpec& spec);
nlohmann::json to_json(const ParamVector& p);
nlohmann::json to_json(const PriorSpec& p);

}  // namespace ingarch
