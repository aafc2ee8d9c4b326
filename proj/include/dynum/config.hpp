#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dynum/horizon.hpp"
#include "dynum/market.hpp"
#include "dynum/policy.hpp"
#include "dynum/scenario.hpp"

namespace dynum::cfg {

struct PolicySpec {
  std::string kind = "old_first";  // none | random | old_first | nearest_fire | rollout
  std::string base = "old_first";  // rollout base
  RolloutConfig rollout;
};

struct SyntheticSiteSpec {
  double c = 1.0;
  double cap = 10.0;
};

using SiteSpec =
    std::variant<PandemicScenarioConfig, WildfireScenarioConfig, SyntheticSiteSpec>;

struct CompareSpec {
  std::vector<std::string> policies = {"none", "random", "old_first"};
  int budget = 1;
  int epochs = 50;
  int replicas = 10000;
};

/// Full experiment description. Loaded from a schema-versioned JSON file;
/// unknown keys are rejected.
struct ExperimentConfig {
  int schema = 1;
  std::string mode = "pandemic";  // pandemic | wildfire | synthetic
  std::uint64_t seed = 1;
  double supply = 0.0;  // z
  HorizonPlan plan;
  PolicySpec policy;
  int eval_replicas = 200;
  int grid_max = 5;
  int workers = 0;
  market::MarketOptions market;
  CompareSpec compare;
  std::vector<SiteSpec> sites;

  sim::Mode sim_mode() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Serialized config (canonical JSON) for manifests.
std::string config_to_json(const ExperimentConfig& cfg);

/// Builds the scenario for site i (pandemic graph seeds derive from
/// cfg.seed and the site index). Throws ConfigError for synthetic sites.
std::shared_ptr<const Scenario> make_site_scenario(const ExperimentConfig& cfg, std::size_t site);

std::shared_ptr<const Policy> make_policy(const PolicySpec& spec, sim::Mode mode, double gamma);

std::uint64_t site_key(const ExperimentConfig& cfg, std::size_t site);

constexpr const char* kVersion = "dynum 1.0.0";

}  // namespace dynum::cfg
