#include "dynum/config.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "dynum/errors.hpp"

namespace dynum::cfg {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::unordered_set<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

pandemic::DemographicSpec parse_demographics(const json& j) {
  require_keys(j,
               {"teens", "adults", "elderly", "er_edge_prob", "target_ead", "degree_tolerance",
                "contact_rate", "recovery_mean", "mortality"},
               "pandemic site");
  pandemic::DemographicSpec d;
  d.n_teen = j.value("teens", 0);
  d.n_adult = j.value("adults", 0);
  d.n_elderly = j.value("elderly", 0);
  d.er_edge_prob = j.value("er_edge_prob", -1.0);
  d.target_ead = j.value("target_ead", -1.0);
  d.degree_tolerance = j.value("degree_tolerance", 0.5);
  d.contact_rate = j.value("contact_rate", 0.02);
  d.recovery_mean = j.value("recovery_mean", 14.0);
  if (j.contains("mortality")) {
    const json& m = j["mortality"];
    require_keys(m, {"teen", "adult", "elderly"}, "mortality");
    d.mortality.teen = m.value("teen", 0.001);
    d.mortality.adult = m.value("adult", 0.01);
    d.mortality.elderly = m.value("elderly", 0.1);
  }
  return d;
}

SiteSpec parse_site(const json& j, const std::string& mode) {
  if (mode == "pandemic") {
    require_keys(j, {"demographics", "dt", "initial_infected"}, "pandemic site");
    if (!j.contains("demographics")) throw ConfigError("pandemic site needs 'demographics'");
    PandemicScenarioConfig c;
    c.demographics = parse_demographics(j.at("demographics"));
    c.dt = j.value("dt", 1.0);
    c.initial_infected = j.value("initial_infected", 5);
    return c;
  }
  if (mode == "wildfire") {
    require_keys(j,
                 {"width", "height", "neighborhood", "wind", "kappa", "vegc", "burnout_rate",
                  "initial_fires", "dt", "max_step", "extinguish_reward", "spread_penalty",
                  "gamma"},
                 "wildfire site");
    WildfireScenarioConfig c;
    c.grid.width = j.value("width", 16);
    c.grid.height = j.value("height", 16);
    c.grid.neighborhood = j.value("neighborhood", 8);
    if (j.contains("wind")) {
      const json& w = j["wind"];
      require_keys(w, {"dx", "dy", "speed", "gain"}, "wind");
      c.grid.wind_dx = w.value("dx", 0.0);
      c.grid.wind_dy = w.value("dy", 0.0);
      c.grid.wind_speed = w.value("speed", 0.0);
      c.grid.wind_gain = w.value("gain", 3.0);
    }
    c.grid.kappa = j.value("kappa", 0.1);
    c.grid.vegc = j.value("vegc", 1.0);
    c.grid.burnout_rate = j.value("burnout_rate", 0.1);
    c.grid.dt = j.value("dt", 0.25);
    c.grid.max_step = j.value("max_step", 1);
    c.grid.extinguish_reward = j.value("extinguish_reward", 1.0);
    c.grid.spread_penalty = j.value("spread_penalty", 1.0);
    c.initial_fires = j.value("initial_fires", 3);
    c.gamma = j.value("gamma", 0.95);
    return c;
  }
  if (mode == "synthetic") {
    require_keys(j, {"c", "cap"}, "synthetic site");
    SyntheticSiteSpec s;
    s.c = j.value("c", 1.0);
    s.cap = j.value("cap", 10.0);
    return s;
  }
  throw ConfigError("unknown mode '" + mode + "'");
}

json demographics_to_json(const pandemic::DemographicSpec& d) {
  json j;
  j["teens"] = d.n_teen;
  j["adults"] = d.n_adult;
  j["elderly"] = d.n_elderly;
  if (d.er_edge_prob >= 0.0) j["er_edge_prob"] = d.er_edge_prob;
  if (d.target_ead >= 0.0) j["target_ead"] = d.target_ead;
  j["degree_tolerance"] = d.degree_tolerance;
  j["contact_rate"] = d.contact_rate;
  j["recovery_mean"] = d.recovery_mean;
  j["mortality"] =
      json{{"teen", d.mortality.teen}, {"adult", d.mortality.adult}, {"elderly", d.mortality.elderly}};
  return j;
}

json site_to_json(const SiteSpec& site) {
  if (const auto* p = std::get_if<PandemicScenarioConfig>(&site)) {
    json j;
    j["demographics"] = demographics_to_json(p->demographics);
    j["dt"] = p->dt;
    j["initial_infected"] = p->initial_infected;
    return j;
  }
  if (const auto* w = std::get_if<WildfireScenarioConfig>(&site)) {
    json j;
    j["width"] = w->grid.width;
    j["height"] = w->grid.height;
    j["neighborhood"] = w->grid.neighborhood;
    j["wind"] = json{{"dx", w->grid.wind_dx},
                     {"dy", w->grid.wind_dy},
                     {"speed", w->grid.wind_speed},
                     {"gain", w->grid.wind_gain}};
    j["kappa"] = w->grid.kappa;
    j["vegc"] = w->grid.vegc;
    j["burnout_rate"] = w->grid.burnout_rate;
    j["dt"] = w->grid.dt;
    j["max_step"] = w->grid.max_step;
    j["extinguish_reward"] = w->grid.extinguish_reward;
    j["spread_penalty"] = w->grid.spread_penalty;
    j["initial_fires"] = w->initial_fires;
    j["gamma"] = w->gamma;
    return j;
  }
  const auto& s = std::get<SyntheticSiteSpec>(site);
  return json{{"c", s.c}, {"cap", s.cap}};
}

}  // namespace

sim::Mode ExperimentConfig::sim_mode() const {
  if (mode == "pandemic") return sim::Mode::Pandemic;
  if (mode == "wildfire") return sim::Mode::Wildfire;
  throw ConfigError("mode '" + mode + "' has no simulation");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  require_keys(j,
               {"schema", "mode", "seed", "supply", "plan", "policy", "eval", "market", "compare",
                "sites"},
               "config");
  ExperimentConfig cfg;
  if (!j.contains("schema")) throw ConfigError("config must declare a schema version");
  cfg.schema = j["schema"].get<int>();
  if (cfg.schema != 1) throw ConfigError("unsupported config schema " + std::to_string(cfg.schema));
  cfg.mode = j.value("mode", "pandemic");
  cfg.seed = j.value("seed", 1ull);
  cfg.supply = j.value("supply", 0.0);

  if (j.contains("plan")) {
    const json& p = j["plan"];
    require_keys(p, {"horizon", "update_period", "windows", "gamma"}, "plan");
    cfg.plan.horizon = p.value("horizon", 10);
    cfg.plan.update_period = p.value("update_period", 5);
    cfg.plan.n_windows = p.value("windows", 1);
    cfg.plan.gamma = p.value("gamma", cfg.mode == "wildfire" ? 0.95 : 0.99);
  }
  if (j.contains("policy")) {
    const json& p = j["policy"];
    require_keys(p, {"kind", "base", "n_rollouts", "lookahead", "candidates"}, "policy");
    cfg.policy.kind = p.value("kind", "old_first");
    cfg.policy.base = p.value("base", std::string(cfg.mode == "wildfire" ? "nearest_fire" : "old_first"));
    cfg.policy.rollout.n_rollouts = p.value("n_rollouts", 2);
    cfg.policy.rollout.lookahead = p.value("lookahead", 10);
    cfg.policy.rollout.max_candidates = p.value("candidates", 8);
  } else {
    cfg.policy.kind = cfg.mode == "wildfire" ? "nearest_fire" : "old_first";
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    require_keys(e, {"replicas", "grid_max", "workers"}, "eval");
    cfg.eval_replicas = e.value("replicas", 200);
    cfg.grid_max = e.value("grid_max", static_cast<int>(cfg.supply));
    cfg.workers = e.value("workers", 0);
  } else {
    cfg.grid_max = static_cast<int>(cfg.supply);
  }
  if (j.contains("market")) {
    const json& m = j["market"];
    require_keys(m, {"alpha", "tol", "max_iters", "lambda0"}, "market");
    cfg.market.alpha = m.value("alpha", -1.0);
    cfg.market.tol = m.value("tol", 1e-6);
    cfg.market.max_iters = m.value("max_iters", 10000);
    if (m.contains("lambda0")) cfg.market.lambda0 = {m["lambda0"].get<double>()};
  }
  if (j.contains("compare")) {
    const json& c = j["compare"];
    require_keys(c, {"policies", "budget", "epochs", "replicas"}, "compare");
    if (c.contains("policies")) cfg.compare.policies = c["policies"].get<std::vector<std::string>>();
    cfg.compare.budget = c.value("budget", 1);
    cfg.compare.epochs = c.value("epochs", 50);
    cfg.compare.replicas = c.value("replicas", 10000);
  }
  if (!j.contains("sites") || !j["sites"].is_array() || j["sites"].empty()) {
    throw ConfigError("config needs a non-empty 'sites' array");
  }
  for (const json& s : j["sites"]) cfg.sites.push_back(parse_site(s, cfg.mode));
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema"] = cfg.schema;
  j["mode"] = cfg.mode;
  j["seed"] = cfg.seed;
  j["supply"] = cfg.supply;
  j["plan"] = json{{"horizon", cfg.plan.horizon},
                   {"update_period", cfg.plan.update_period},
                   {"windows", cfg.plan.n_windows},
                   {"gamma", cfg.plan.gamma}};
  j["policy"] = json{{"kind", cfg.policy.kind},
                     {"base", cfg.policy.base},
                     {"n_rollouts", cfg.policy.rollout.n_rollouts},
                     {"lookahead", cfg.policy.rollout.lookahead},
                     {"candidates", cfg.policy.rollout.max_candidates}};
  j["eval"] = json{{"replicas", cfg.eval_replicas}, {"grid_max", cfg.grid_max}, {"workers", cfg.workers}};
  j["market"] = json{{"alpha", cfg.market.alpha},
                     {"tol", cfg.market.tol},
                     {"max_iters", cfg.market.max_iters}};
  j["compare"] = json{{"policies", cfg.compare.policies},
                      {"budget", cfg.compare.budget},
                      {"epochs", cfg.compare.epochs},
                      {"replicas", cfg.compare.replicas}};
  json sites = json::array();
  for (const SiteSpec& s : cfg.sites) sites.push_back(site_to_json(s));
  j["sites"] = sites;
  return j.dump(2);
}

std::uint64_t site_key(const ExperimentConfig& cfg, std::size_t site) {
  return fold_seq(cfg.seed, {static_cast<std::uint64_t>(StreamTag::Site),
                             static_cast<std::uint64_t>(site)});
}

std::shared_ptr<const Scenario> make_site_scenario(const ExperimentConfig& cfg, std::size_t site) {
  if (site >= cfg.sites.size()) throw ConfigError("site index out of range");
  const std::uint64_t key = site_key(cfg, site);
  if (const auto* p = std::get_if<PandemicScenarioConfig>(&cfg.sites[site])) {
    return make_pandemic_scenario(*p, key);
  }
  if (const auto* w = std::get_if<WildfireScenarioConfig>(&cfg.sites[site])) {
    WildfireScenarioConfig materialized = *w;
    materialized.grid.materialize(key);
    return make_wildfire_scenario(materialized);
  }
  throw ConfigError("synthetic sites have no simulation scenario");
}

std::shared_ptr<const Policy> make_policy(const PolicySpec& spec, sim::Mode mode, double gamma) {
  if (spec.kind == "rollout") {
    std::shared_ptr<const Policy> base = make_baseline(baseline_kind_from_name(spec.base), mode);
    return make_rollout_policy(std::move(base), spec.rollout, gamma);
  }
  return make_baseline(baseline_kind_from_name(spec.kind), mode);
}

}  // namespace dynum::cfg
