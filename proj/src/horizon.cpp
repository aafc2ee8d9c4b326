#include "dynum/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dynum/errors.hpp"

namespace dynum {

void HorizonPlan::validate() const {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (update_period < 1) throw ConfigError("update_period must be >= 1");
  if (update_period > horizon) throw ConfigError("update_period must be <= horizon");
  if (n_windows < 1) throw ConfigError("n_windows must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
}

SiteRuntime::SiteRuntime(std::shared_ptr<const Scenario> scenario,
                         std::shared_ptr<const Policy> policy, SiteRuntimeConfig cfg)
    : scenario_(std::move(scenario)), policy_(std::move(policy)), cfg_(cfg) {
  if (cfg_.grid_max < 0) throw ConfigError("grid_max must be >= 0");
  ground_ = scenario_->initial_state(fold(cfg_.site_key, StreamTag::InitialState));
}

fit::PwlUtility SiteRuntime::window_advance(int window, int alloc, int advance_epochs, bool refit,
                                            WindowGroundStats* stats) {
  if (window < 0) throw ContractViolation("window index must be >= 0");
  if (window <= window_done_) {
    // Duplicate delivery (retry or replay): answer from cache, do not re-advance.
    if (stats) *stats = cached_stats_;
    return cached_fit_;
  }
  if (window != window_done_ + 1) {
    throw ContractViolation("window_advance out of order: expected " +
                            std::to_string(window_done_ + 1) + ", got " + std::to_string(window));
  }

  WindowGroundStats ground_stats;
  if (advance_epochs > 0) {
    scenario_->set_budget(ground_, alloc);
    const std::uint64_t traj_key =
        fold_seq(cfg_.site_key, {static_cast<std::uint64_t>(StreamTag::Ground), 0});
    for (int e = 0; e < advance_epochs; ++e) {
      const std::uint64_t decision_key =
          fold_seq(cfg_.site_key, {static_cast<std::uint64_t>(StreamTag::Ground), 1,
                                   static_cast<std::uint64_t>(ground_.cells.epoch)});
      const Action a = policy_->decide(*scenario_, ground_, alloc, Rng(decision_key));
      const StepStats st = scenario_->step(ground_, a, alloc, traj_key);
      ground_stats.realized_utility += st.utility;
      std::ostringstream row;
      row << sim::histogram_csv_row(ground_.cells);
      if (scenario_->mode() == sim::Mode::Wildfire) {
        row << "," << st.extinguished << ",";
        for (std::size_t u = 0; u < ground_.units.positions.size(); ++u) {
          row << (u ? ";" : "") << ground_.units.positions[u];
        }
      }
      ground_stats.epoch_rows.push_back(row.str());
    }
  }

  if (refit) {
    // Sample F(y) on the integer budget grid from the current ground state.
    const std::uint64_t window_key =
        fold_seq(cfg_.site_key, {static_cast<std::uint64_t>(StreamTag::Evaluate),
                                 static_cast<std::uint64_t>(window)});
    EvaluateOptions eopts;
    eopts.horizon = cfg_.horizon;
    eopts.gamma = cfg_.gamma;
    eopts.n_replicas = cfg_.eval_replicas;
    eopts.workers = cfg_.workers;
    std::vector<std::pair<double, double>> samples;
    samples.reserve(static_cast<std::size_t>(cfg_.grid_max) + 1);
    for (int y = 0; y <= cfg_.grid_max; ++y) {
      const FEstimate est = evaluate_F(*scenario_, *policy_, y, eopts,
                                       fold(window_key, static_cast<std::uint64_t>(y)), &ground_);
      samples.emplace_back(static_cast<double>(y), est.mean);
    }
    last_samples_ = samples;
    fbar_ = fit::fit_concave_monotone(samples);
  }

  window_done_ = window;
  cached_fit_ = fbar_;
  cached_stats_ = ground_stats;
  if (stats) *stats = ground_stats;
  return fbar_;
}

double SiteRuntime::respond_scalar(double lambda) const {
  return market::primal_response_scalar(fbar_, lambda, static_cast<double>(cfg_.grid_max));
}

double SiteRuntime::max_marginal() const {
  double m = 0.0;
  for (const auto& a : fbar_.anchors()) {
    for (double g : a.g) m = std::max(m, g);
  }
  return m;
}

std::vector<int> repair_allocations(const std::vector<fit::PwlUtility>& models,
                                    const std::vector<double>& demands, double supply) {
  const std::size_t n = models.size();
  if (demands.size() != n) throw ContractViolation("repair_allocations: size mismatch");
  const int budget = static_cast<int>(std::floor(supply + 1e-9));
  // Per-site cap: the largest sampled anchor; the surrogate is not trusted
  // beyond the budgets it was fitted on.
  std::vector<int> cap(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& a : models[i].anchors()) {
      cap[i] = std::max(cap[i], static_cast<int>(std::floor(a.y.at(0) + 1e-9)));
    }
  }
  std::vector<int> alloc(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    alloc[i] = std::max(0, std::min({budget, cap[i], static_cast<int>(std::floor(demands[i] + 1e-9))}));
  }
  auto marginal_gain = [&](std::size_t i, int y) {
    if (models[i].empty() || y >= cap[i]) return 0.0;
    return models[i].evaluate(static_cast<double>(y + 1)) - models[i].evaluate(static_cast<double>(y));
  };
  int total = 0;
  for (int a : alloc) total += a;
  while (total > budget) {
    // Drop the unit whose removal costs the least.
    std::size_t best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (alloc[i] == 0) continue;
      const double loss = marginal_gain(i, alloc[i] - 1);
      if (loss < best_loss) {
        best_loss = loss;
        best = i;
      }
    }
    --alloc[best];
    --total;
  }
  while (total < budget) {
    std::size_t best = n;
    double best_gain = 1e-12;
    for (std::size_t i = 0; i < n; ++i) {
      const double gain = marginal_gain(i, alloc[i]);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best == n) break;  // no site benefits from more
    ++alloc[best];
    ++total;
  }
  return alloc;
}

RunTrace run_rolling_horizon(const std::vector<SiteHandle*>& sites, const ControllerOptions& opts) {
  opts.plan.validate();
  if (sites.empty()) throw ConfigError("run_rolling_horizon: no sites");
  if (opts.supply < 0.0) throw ConfigError("supply must be >= 0");

  const std::size_t n = sites.size();
  RunTrace trace;
  trace.ground_rows.resize(n);
  std::vector<fit::PwlUtility> models(n);
  std::vector<int> alloc(n, 0);

  for (int w = 0; w < opts.plan.n_windows; ++w) {
    WindowRecord rec;
    rec.window = w;
    rec.stale.assign(n, false);
    rec.realized_utility.assign(n, 0.0);
    const int advance = w == 0 ? 0 : opts.plan.update_period;
    for (std::size_t i = 0; i < n; ++i) {
      WindowGroundStats stats;
      try {
        models[i] = sites[i]->window_advance(w, alloc[i], advance, true, &stats);
      } catch (const SiteUnavailable&) {
        rec.stale[i] = true;  // reuse the previous surrogate
      }
      // The epochs just advanced realized the previous window's allocation.
      if (w > 0) trace.windows.back().realized_utility[i] = stats.realized_utility;
      for (const std::string& row : stats.epoch_rows) trace.ground_rows[i].push_back(row);
    }

    std::vector<market::SiteResponder*> responders(sites.begin(), sites.end());
    const market::MarketResult mr = market::run_market(
        std::span<market::SiteResponder* const>(responders.data(), responders.size()),
        {opts.supply}, opts.market, opts.keep_market_trace);
    rec.market_converged = mr.converged;
    rec.lambda = mr.lambda.empty() ? 0.0 : mr.lambda[0];
    for (const auto& y : mr.demands) rec.demand.push_back(y.empty() ? 0.0 : y[0]);
    if (opts.keep_market_trace) rec.market_trace = mr.trace;

    alloc = repair_allocations(models, rec.demand, opts.supply);
    rec.alloc = alloc;
    rec.models = models;
    trace.windows.push_back(std::move(rec));
  }

  // Final advance realizes the last window's allocation; no refit needed.
  for (std::size_t i = 0; i < n; ++i) {
    WindowGroundStats stats;
    try {
      sites[i]->window_advance(opts.plan.n_windows, alloc[i], opts.plan.update_period, false,
                               &stats);
    } catch (const SiteUnavailable&) {
      continue;
    }
    trace.windows.back().realized_utility[i] = stats.realized_utility;
    for (const std::string& row : stats.epoch_rows) trace.ground_rows[i].push_back(row);
  }
  return trace;
}

}  // namespace dynum
