#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynum/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dynum: stochastic dynamic network-utility-maximization toolkit"};
  app.require_subcommand(1);

  dynum::cmd::CommonArgs common;
  auto add_common = [&](CLI::App* sub, bool with_output = true) {
    sub->add_option("-c,--config", common.config_path, "experiment config (JSON)")->required();
    if (with_output) sub->add_option("-o,--output", common.output_dir, "output directory");
    sub->add_option("--seed", common.seed_override, "override the config seed");
    sub->add_option("--workers", common.workers_override, "worker threads (0 = all cores)");
  };

  int site_filter = -1;
  auto* evaluate = app.add_subcommand("evaluate", "sample F(y) over the budget grid per site");
  add_common(evaluate);
  evaluate->add_option("--site", site_filter, "evaluate a single site index");

  auto* run = app.add_subcommand("run", "in-process rolling-horizon experiment");
  add_common(run);

  std::vector<std::string> endpoints;
  auto* coordinate = app.add_subcommand("coordinate", "rolling-horizon run against remote sites");
  add_common(coordinate);
  coordinate->add_option("--sites", endpoints, "site endpoints host:port (one per site)")
      ->required()
      ->delimiter(',');

  std::vector<std::string> policies;
  auto* compare = app.add_subcommand("compare-policies", "policy comparison protocol");
  add_common(compare);
  compare->add_option("--policies", policies,
                      "policies to compare (none,random,old_first,rollout_<base>)")
      ->delimiter(',');

  std::string samples_path, model_out = "model.txt";
  auto* fit = app.add_subcommand("fit", "fit a concave non-decreasing PWL surrogate");
  fit->add_option("--samples", samples_path, "CSV of samples (y columns..., u)")->required();
  fit->add_option("-o,--output", model_out, "model output path");

  int site_id = 0, max_messages = -1;
  std::string listen = "127.0.0.1:0", port_file;
  auto* serve = app.add_subcommand("serve-site", "run one site agent");
  add_common(serve, false);
  serve->add_option("--site-id", site_id, "index of this site in the config")->required();
  serve->add_option("--listen", listen, "listen endpoint host:port");
  serve->add_option("--max-messages", max_messages,
                    "exit after handling this many messages (testing aid)");
  serve->add_option("--port-file", port_file, "write the bound port to this file");

  CLI11_PARSE(app, argc, argv);

  if (evaluate->parsed()) return dynum::cmd::cmd_evaluate(common, site_filter);
  if (run->parsed()) return dynum::cmd::cmd_run(common);
  if (coordinate->parsed()) return dynum::cmd::cmd_coordinate(common, endpoints);
  if (compare->parsed()) return dynum::cmd::cmd_compare_policies(common, policies);
  if (fit->parsed()) return dynum::cmd::cmd_fit(samples_path, model_out);
  if (serve->parsed()) {
    return dynum::cmd::cmd_serve_site(common, site_id, listen, max_messages, port_file);
  }
  return dynum::cmd::kExitConfig;
}
