#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynum/concave_fit.hpp"
#include "dynum/evaluate.hpp"
#include "dynum/market.hpp"
#include "dynum/policy.hpp"
#include "dynum/scenario.hpp"

namespace dynum {

/// Rolling-window schedule: a T-epoch lookahead is re-optimized every tau
/// epochs; within a window the per-site allocation stays constant.
struct HorizonPlan {
  int horizon = 10;       // T
  int update_period = 5;  // tau
  int n_windows = 1;
  double gamma = 0.99;

  void validate() const;
};

/// Ground-truth statistics of the epochs advanced in one window.
struct WindowGroundStats {
  double realized_utility = 0.0;  // undiscounted sum over the advanced epochs
  std::vector<std::string> epoch_rows;  // per-epoch CSV rows (mode-specific schema)
};

/// One site as seen by the rolling-horizon coordinator. Implementations:
/// in-process SiteRuntime wrapper and the socket-backed remote site.
class SiteHandle : public market::SiteResponder {
 public:
  /// Advances the ground state `advance_epochs` epochs under the allocation
  /// in effect, then (if refit) re-estimates and re-fits the surrogate for
  /// the next window. Idempotent per window index.
  virtual fit::PwlUtility window_advance(int window, int alloc, int advance_epochs, bool refit,
                                         WindowGroundStats* stats) = 0;
  virtual void shutdown() {}
};

struct SiteRuntimeConfig {
  int grid_max = 5;        // surrogate sampled at budgets 0..grid_max
  int eval_replicas = 200;
  int horizon = 10;        // lookahead T used for surrogate sampling
  double gamma = 0.99;
  int workers = 0;
  std::uint64_t site_key = 0;
};

/// Owns one site's scenario, policy, ground state and current surrogate.
/// All randomness is derived from site_key, window and epoch indices, so a
/// restarted runtime replaying the same window_advance sequence reproduces
/// the exact same state and surrogates.
class SiteRuntime {
 public:
  SiteRuntime(std::shared_ptr<const Scenario> scenario, std::shared_ptr<const Policy> policy,
              SiteRuntimeConfig cfg);

  fit::PwlUtility window_advance(int window, int alloc, int advance_epochs, bool refit,
                                 WindowGroundStats* stats);
  double respond_scalar(double lambda) const;
  double max_marginal() const;
  int grid_max() const { return cfg_.grid_max; }
  const fit::PwlUtility& surrogate() const { return fbar_; }
  const SimState& ground() const { return ground_; }
  int window_done() const { return window_done_; }
  const std::vector<std::pair<double, double>>& last_samples() const { return last_samples_; }

 private:
  std::shared_ptr<const Scenario> scenario_;
  std::shared_ptr<const Policy> policy_;
  SiteRuntimeConfig cfg_;
  SimState ground_;
  fit::PwlUtility fbar_;
  std::vector<std::pair<double, double>> last_samples_;
  int window_done_ = -1;
  fit::PwlUtility cached_fit_;
  WindowGroundStats cached_stats_;
};

/// In-process SiteHandle over a SiteRuntime.
class LocalSite final : public SiteHandle {
 public:
  LocalSite(std::shared_ptr<const Scenario> scenario, std::shared_ptr<const Policy> policy,
            SiteRuntimeConfig cfg)
      : runtime_(std::move(scenario), std::move(policy), cfg) {}

  fit::PwlUtility window_advance(int window, int alloc, int advance_epochs, bool refit,
                                 WindowGroundStats* stats) override {
    return runtime_.window_advance(window, alloc, advance_epochs, refit, stats);
  }
  market::Vec respond(const market::Vec& lambda) override {
    return {runtime_.respond_scalar(lambda.at(0))};
  }
  double max_marginal() const override { return runtime_.max_marginal(); }
  SiteRuntime& runtime() { return runtime_; }

 private:
  SiteRuntime runtime_;
};

struct ControllerOptions {
  HorizonPlan plan;
  double supply = 0.0;  // z (scalar resource)
  market::MarketOptions market;
  bool keep_market_trace = true;
};

struct WindowRecord {
  int window = 0;
  std::vector<int> alloc;
  std::vector<double> demand;      // market demands before integer repair
  double lambda = 0.0;
  bool market_converged = true;
  std::vector<bool> stale;         // site failed to report; previous surrogate reused
  std::vector<double> realized_utility;  // filled at the next window advance
  std::vector<fit::PwlUtility> models;   // surrogates used for this window's market
  std::vector<market::MarketTraceRow> market_trace;
};

struct RunTrace {
  std::vector<WindowRecord> windows;
  std::vector<std::vector<std::string>> ground_rows;  // per site, per epoch CSV rows
};

/// Rounds market demands to integers and repairs them against the budget:
/// decrements the smallest marginal loss while infeasible, then spends any
/// slack on the largest positive marginal gain. Greedy is optimal for
/// separable concave integer utilities.
std::vector<int> repair_allocations(const std::vector<fit::PwlUtility>& models,
                                    const std::vector<double>& demands, double supply);

/// Runs the full rolling-horizon loop: advance ground state, refit
/// surrogates, clear the market, repair to integer allocations, repeat.
/// Sites that throw SiteUnavailable from window_advance keep their previous
/// surrogate (stale flag set). A final advance realizes the last window.
RunTrace run_rolling_horizon(const std::vector<SiteHandle*>& sites, const ControllerOptions& opts);

}  // namespace dynum
