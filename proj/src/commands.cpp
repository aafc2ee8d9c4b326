#include "dynum/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "dynum/coordinator.hpp"
#include "dynum/errors.hpp"
#include "dynum/evaluate.hpp"
#include "dynum/site_agent.hpp"
#include "dynum/strings.hpp"

namespace dynum::cmd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

cfg::ExperimentConfig load(const CommonArgs& args) {
  cfg::ExperimentConfig config = cfg::load_experiment_config(args.config_path);
  if (args.seed_override != 0) config.seed = args.seed_override;
  if (args.workers_override >= 0) config.workers = args.workers_override;
  return config;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_manifest(const CommonArgs& args, const cfg::ExperimentConfig& config,
                    const std::string& command, const std::vector<std::string>& outputs) {
  json m;
  m["version"] = cfg::kVersion;
  m["command"] = command;
  m["root_seed"] = config.seed;
  m["config"] = json::parse(cfg::config_to_json(config));
  m["outputs"] = outputs;
  write_file(fs::path(args.output_dir) / "manifest.json", m.dump(2) + "\n");
}

std::string ground_header(sim::Mode mode) {
  std::string h = "epoch,susceptible,infected,dead,vaccinated,recovered";
  if (mode == sim::Mode::Wildfire) h += ",extinguished_actions,unit_positions";
  return h;
}

struct SiteBundle {
  std::vector<std::shared_ptr<const Scenario>> scenarios;
  std::vector<std::shared_ptr<const Policy>> policies;
};

SiteBundle build_sites(const cfg::ExperimentConfig& config) {
  SiteBundle b;
  for (std::size_t i = 0; i < config.sites.size(); ++i) {
    b.scenarios.push_back(cfg::make_site_scenario(config, i));
    b.policies.push_back(cfg::make_policy(config.policy, config.sim_mode(), config.plan.gamma));
  }
  return b;
}

SiteRuntimeConfig runtime_config(const cfg::ExperimentConfig& config, std::size_t site) {
  SiteRuntimeConfig rc;
  rc.grid_max = config.grid_max;
  rc.eval_replicas = config.eval_replicas;
  rc.horizon = config.plan.horizon;
  rc.gamma = config.plan.gamma;
  rc.workers = config.workers;
  rc.site_key = cfg::site_key(config, site);
  return rc;
}

void write_run_outputs(const CommonArgs& args, const cfg::ExperimentConfig& config,
                       const RunTrace& trace, const std::string& command) {
  const std::size_t n = config.sites.size();
  std::vector<std::string> outputs;

  {
    std::ostringstream csv;
    csv << "window,k,lambda,excess";
    for (std::size_t i = 0; i < n; ++i) csv << ",y" << i;
    csv << "\n";
    for (const WindowRecord& w : trace.windows) {
      for (const auto& row : w.market_trace) {
        csv << w.window << "," << row.k << "," << fmt_double(row.lambda.at(0)) << ","
            << fmt_double(row.excess.at(0));
        for (const auto& d : row.demands) csv << "," << fmt_double(d.at(0));
        csv << "\n";
      }
    }
    write_file(fs::path(args.output_dir) / "market_trace.csv", csv.str());
    outputs.push_back("market_trace.csv");
  }

  {
    std::ostringstream csv;
    csv << "window,site,alloc,demand,lambda,stale,market_converged,realized_utility\n";
    for (const WindowRecord& w : trace.windows) {
      for (std::size_t i = 0; i < n; ++i) {
        csv << w.window << "," << i << "," << w.alloc[i] << "," << fmt_double(w.demand[i]) << ","
            << fmt_double(w.lambda) << "," << (w.stale[i] ? 1 : 0) << ","
            << (w.market_converged ? 1 : 0) << "," << fmt_double(w.realized_utility[i]) << "\n";
      }
    }
    write_file(fs::path(args.output_dir) / "allocations.csv", csv.str());
    outputs.push_back("allocations.csv");
  }

  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream csv;
    csv << ground_header(config.sim_mode()) << "\n";
    for (const std::string& row : trace.ground_rows[i]) csv << row << "\n";
    const std::string name = "ground_" + std::to_string(i) + ".csv";
    write_file(fs::path(args.output_dir) / name, csv.str());
    outputs.push_back(name);
  }

  outputs.push_back("manifest.json");
  write_manifest(args, config, command, outputs);
}

ControllerOptions controller_options(const cfg::ExperimentConfig& config) {
  ControllerOptions opts;
  opts.plan = config.plan;
  opts.supply = config.supply;
  opts.market = config.market;
  return opts;
}

int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const SiteUnavailable& e) {
    std::fprintf(stderr, "transport error: %s\n", e.what());
    return kExitTransport;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}

}  // namespace

int cmd_evaluate(const CommonArgs& args, int site_filter) {
  return guard([&] {
    const cfg::ExperimentConfig config = load(args);
    fs::create_directories(args.output_dir);
    const SiteBundle bundle = build_sites(config);

    EvaluateOptions eopts;
    eopts.horizon = config.plan.horizon;
    eopts.gamma = config.plan.gamma;
    eopts.n_replicas = config.eval_replicas;
    eopts.workers = config.workers;

    std::ostringstream csv;
    csv << "site,y,mean,stderr,replicas\n";
    for (std::size_t i = 0; i < config.sites.size(); ++i) {
      if (site_filter >= 0 && static_cast<std::size_t>(site_filter) != i) continue;
      const std::uint64_t eval_key =
          fold(cfg::site_key(config, i), StreamTag::Evaluate);
      for (int y = 0; y <= config.grid_max; ++y) {
        const FEstimate est = evaluate_F(*bundle.scenarios[i], *bundle.policies[i], y, eopts,
                                         fold(eval_key, static_cast<std::uint64_t>(y)));
        csv << i << "," << y << "," << fmt_double(est.mean) << "," << fmt_double(est.std_error)
            << "," << est.n << "\n";
      }
    }
    write_file(fs::path(args.output_dir) / "evaluate.csv", csv.str());
    write_manifest(args, config, "evaluate", {"evaluate.csv", "manifest.json"});
    return kExitOk;
  });
}

int cmd_run(const CommonArgs& args) {
  return guard([&] {
    const cfg::ExperimentConfig config = load(args);
    fs::create_directories(args.output_dir);
    const SiteBundle bundle = build_sites(config);

    std::vector<std::unique_ptr<LocalSite>> locals;
    std::vector<SiteHandle*> handles;
    for (std::size_t i = 0; i < config.sites.size(); ++i) {
      locals.push_back(std::make_unique<LocalSite>(bundle.scenarios[i], bundle.policies[i],
                                                   runtime_config(config, i)));
      handles.push_back(locals.back().get());
    }
    const RunTrace trace = run_rolling_horizon(handles, controller_options(config));
    write_run_outputs(args, config, trace, "run");
    return kExitOk;
  });
}

int cmd_coordinate(const CommonArgs& args, const std::vector<std::string>& endpoints) {
  return guard([&] {
    const cfg::ExperimentConfig config = load(args);
    if (endpoints.size() != config.sites.size()) {
      throw ConfigError("need one endpoint per site (" + std::to_string(config.sites.size()) +
                        " sites)");
    }
    fs::create_directories(args.output_dir);

    std::vector<std::unique_ptr<proto::RemoteSite>> remotes;
    std::vector<SiteHandle*> handles;
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
      proto::RemoteSiteOptions ropts;
      ropts.endpoint = net::parse_endpoint(endpoints[i]);
      ropts.site_id = static_cast<int>(i);
      remotes.push_back(std::make_unique<proto::RemoteSite>(ropts));
      handles.push_back(remotes.back().get());
    }
    const RunTrace trace = run_rolling_horizon(handles, controller_options(config));
    for (auto& r : remotes) r->shutdown();
    write_run_outputs(args, config, trace, "coordinate");
    return kExitOk;
  });
}

int cmd_compare_policies(const CommonArgs& args, const std::vector<std::string>& policies) {
  return guard([&] {
    const cfg::ExperimentConfig config = load(args);
    if (config.sim_mode() != sim::Mode::Pandemic) {
      throw ConfigError("compare-policies runs the pandemic protocol");
    }
    if (config.compare.replicas < 1) throw ConfigError("compare.replicas must be >= 1");
    fs::create_directories(args.output_dir);
    const SiteBundle bundle = build_sites(config);

    std::vector<std::string> list = policies.empty() ? config.compare.policies : policies;
    // Deaths are normalized to the no-vaccination policy, so always run it.
    if (std::find(list.begin(), list.end(), "none") == list.end()) {
      list.insert(list.begin(), "none");
    }

    EvaluateOptions eopts;
    eopts.horizon = config.compare.epochs;
    eopts.gamma = 1.0;  // total deaths, undiscounted
    eopts.n_replicas = config.compare.replicas;
    eopts.workers = config.workers;

    std::ostringstream csv;
    csv << "site,policy,mean_deaths,stderr,normalized,replicas\n";
    for (std::size_t i = 0; i < config.sites.size(); ++i) {
      const std::uint64_t eval_key = fold(cfg::site_key(config, i), StreamTag::Evaluate);
      double none_deaths = -1.0;
      for (const std::string& name : list) {
        cfg::PolicySpec spec;
        if (name.rfind("rollout_", 0) == 0) {
          spec.kind = "rollout";
          spec.base = name.substr(8);
          spec.rollout = config.policy.rollout;
        } else {
          spec.kind = name;
        }
        const auto policy = cfg::make_policy(spec, sim::Mode::Pandemic, config.plan.gamma);
        // Same eval_key for every policy: replicas are paired through common
        // initial states and contagion draws.
        const FEstimate est = evaluate_F(*bundle.scenarios[i], *policy, config.compare.budget,
                                         eopts, eval_key);
        const double deaths = -est.mean;
        if (name == "none") none_deaths = deaths;
        const double normalized = none_deaths > 0.0 ? deaths / none_deaths : 0.0;
        csv << i << "," << name << "," << fmt_double(deaths) << "," << fmt_double(est.std_error)
            << "," << fmt_double(normalized) << "," << est.n << "\n";
      }
    }
    write_file(fs::path(args.output_dir) / "policies.csv", csv.str());
    write_manifest(args, config, "compare-policies", {"policies.csv", "manifest.json"});
    return kExitOk;
  });
}

int cmd_fit(const std::string& samples_path, const std::string& model_out) {
  return guard([&] {
    std::ifstream in(samples_path);
    if (!in) throw ConfigError("cannot open samples file " + samples_path);
    std::vector<std::pair<std::vector<double>, double>> samples;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<double> values;
      std::stringstream row(line);
      std::string cell;
      while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
      if (values.size() < 2) throw ConfigError("samples rows need at least y,u columns");
      const double u = values.back();
      values.pop_back();
      samples.emplace_back(std::move(values), u);
    }
    fit::FitReport report;
    const fit::PwlUtility model = fit::fit_concave_monotone(samples, &report);
    write_file(model_out, model.to_text());
    std::printf("fit: n=%d dim=%d objective=%s kkt_feasibility=%.3g kkt_complementarity=%.3g\n",
                model.size(), model.dim(), fmt_double(report.objective).c_str(),
                report.kkt_feasibility, report.kkt_complementarity);
    std::printf("epsilon_proxy=%s (certificate: 2*sqrt(eps/m_f) for your m_f)\n",
                fmt_double(fit::epsilon_proxy(model, samples)).c_str());
    return kExitOk;
  });
}

int cmd_serve_site(const CommonArgs& args, int site_id, const std::string& listen,
                   int max_messages, const std::string& port_file) {
  return guard([&] {
    const cfg::ExperimentConfig config = load(args);
    if (site_id < 0 || static_cast<std::size_t>(site_id) >= config.sites.size()) {
      throw ConfigError("site id out of range");
    }
    auto scenario = cfg::make_site_scenario(config, static_cast<std::size_t>(site_id));
    auto policy = cfg::make_policy(config.policy, config.sim_mode(), config.plan.gamma);
    SiteRuntime runtime(std::move(scenario), std::move(policy),
                        runtime_config(config, static_cast<std::size_t>(site_id)));

    proto::SiteAgentOptions sopts;
    sopts.listen = net::parse_endpoint(listen);
    sopts.site_id = site_id;
    sopts.max_messages = max_messages;
    sopts.port_file = port_file;
    return proto::serve_site(runtime, sopts);
  });
}

}  // namespace dynum::cmd
