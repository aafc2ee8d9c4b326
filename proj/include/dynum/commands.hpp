#pragma once

#include <string>
#include <vector>

#include "dynum/config.hpp"

namespace dynum::cmd {

/// Exit codes shared by all subcommands (documented in the README):
/// 0 success, 2 usage/configuration error, 3 runtime failure,
/// 4 transport failure (site unreachable).
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitTransport = 4;

struct CommonArgs {
  std::string config_path;
  std::string output_dir = "out";
  std::uint64_t seed_override = 0;  // 0 = use the config's seed
  int workers_override = -1;
};

/// Samples F(y) for y = 0..grid_max per site -> evaluate.csv.
int cmd_evaluate(const CommonArgs& args, int site_filter = -1);

/// Full in-process rolling-horizon run -> market_trace.csv, allocations.csv,
/// ground_<site>.csv, manifest.json.
int cmd_run(const CommonArgs& args);

/// Same run with remote sites over the wire protocol.
int cmd_coordinate(const CommonArgs& args, const std::vector<std::string>& endpoints);

/// Policy comparison protocol -> policies.csv (deaths normalized to 'none').
int cmd_compare_policies(const CommonArgs& args, const std::vector<std::string>& policies);

/// Fits a concave non-decreasing PWL surrogate to a samples CSV.
int cmd_fit(const std::string& samples_path, const std::string& model_out);

/// Long-running site agent process.
int cmd_serve_site(const CommonArgs& args, int site_id, const std::string& listen,
                   int max_messages, const std::string& port_file = "");

}  // namespace dynum::cmd
