#include "dynum/policy.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "dynum/errors.hpp"

namespace dynum {

namespace {

int clamp_coord(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

const wildfire::GridSpec& require_grid(const Scenario& scenario) {
  const wildfire::GridSpec* g = scenario.grid_spec();
  if (!g) throw ContractViolation("policy requires a wildfire grid scenario");
  return *g;
}

/// One Chebyshev-bounded step from `pos` toward `target`, clipped to the grid.
std::int32_t step_toward(const wildfire::GridSpec& grid, std::int32_t pos, std::int32_t target,
                         int max_step) {
  const int x = grid.cell_x(pos) + clamp_coord(grid.cell_x(target) - grid.cell_x(pos), -max_step, max_step);
  const int y = grid.cell_y(pos) + clamp_coord(grid.cell_y(target) - grid.cell_y(pos), -max_step, max_step);
  return grid.cell_id(clamp_coord(x, 0, grid.width - 1), clamp_coord(y, 0, grid.height - 1));
}

class NonePolicy final : public Policy {
 public:
  std::string name() const override { return "none"; }
  Action decide(const Scenario& scenario, const SimState& state, int, Rng) const override {
    Action a;
    if (scenario.mode() == sim::Mode::Wildfire) a.unit_targets = state.units.positions;
    return a;
  }
};

class RandomPolicy final : public Policy {
 public:
  std::string name() const override { return "random"; }
  Action decide(const Scenario& scenario, const SimState& state, int budget, Rng rng) const override {
    Action a;
    if (scenario.mode() == sim::Mode::Pandemic) {
      std::vector<std::int32_t> mask = scenario.action_mask(state);
      rng.shuffle(mask);
      if (static_cast<int>(mask.size()) > budget) mask.resize(static_cast<std::size_t>(budget));
      std::sort(mask.begin(), mask.end());
      a.vaccinate = std::move(mask);
    } else {
      const auto& grid = require_grid(scenario);
      const int r = state.units.max_step;
      const int side = 2 * r + 1;
      for (std::int32_t pos : state.units.positions) {
        const int dx = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(side))) - r;
        const int dy = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(side))) - r;
        const int x = clamp_coord(grid.cell_x(pos) + dx, 0, grid.width - 1);
        const int y = clamp_coord(grid.cell_y(pos) + dy, 0, grid.height - 1);
        a.unit_targets.push_back(grid.cell_id(x, y));
      }
    }
    return a;
  }
};

class OldFirstPolicy final : public Policy {
 public:
  std::string name() const override { return "old_first"; }
  Action decide(const Scenario& scenario, const SimState& state, int budget, Rng rng) const override {
    Action a;
    if (budget <= 0) return a;
    const auto& graph = scenario.graph();
    std::array<std::vector<std::int32_t>, 3> by_group;  // elderly, adult, teen
    for (std::int32_t p : scenario.action_mask(state)) {
      const std::string& tag = graph.tag(p);
      const std::size_t slot = tag == "elderly" ? 0 : tag == "adult" ? 1 : 2;
      by_group[slot].push_back(p);
    }
    for (auto& group : by_group) {
      rng.shuffle(group);
      for (std::int32_t p : group) {
        if (static_cast<int>(a.vaccinate.size()) >= budget) break;
        a.vaccinate.push_back(p);
      }
    }
    std::sort(a.vaccinate.begin(), a.vaccinate.end());
    return a;
  }
};

class NearestFirePolicy final : public Policy {
 public:
  std::string name() const override { return "nearest_fire"; }
  Action decide(const Scenario& scenario, const SimState& state, int, Rng) const override {
    Action a;
    const auto& grid = require_grid(scenario);
    const std::vector<std::int32_t> burning = scenario.action_mask(state);
    for (std::int32_t pos : state.units.positions) {
      std::int32_t best = pos;
      int best_d = std::numeric_limits<int>::max();
      for (std::int32_t b : burning) {
        const int d = wildfire::chebyshev(grid, pos, b);
        if (d < best_d) {
          best_d = d;
          best = b;
        }
      }
      a.unit_targets.push_back(step_toward(grid, pos, best, state.units.max_step));
    }
    return a;
  }
};

/// One-step lookahead with Monte Carlo continuation under the base policy.
class RolloutPolicy final : public Policy {
 public:
  RolloutPolicy(std::shared_ptr<const Policy> base, RolloutConfig cfg, double gamma)
      : base_(std::move(base)), cfg_(cfg), gamma_(gamma) {
    if (cfg_.n_rollouts < 1) throw ConfigError("rollout needs n_rollouts >= 1");
    if (cfg_.lookahead < 0) throw ConfigError("rollout lookahead must be >= 0");
  }

  std::string name() const override { return "rollout_" + base_->name(); }

  Action decide(const Scenario& scenario, const SimState& state, int budget, Rng rng) const override {
    const std::uint64_t decision_key = rng.key();
    Action base_action = base_->decide(scenario, state, budget, Rng(fold(decision_key, 0)));
    std::vector<Action> candidates =
        scenario.candidate_actions(state, budget, cfg_.max_candidates, Rng(fold(decision_key, 1)));
    candidates.push_back(base_action);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    if (candidates.size() == 1) return candidates.front();

    // Common random numbers: rollout r uses the same trajectory/policy keys
    // for every candidate, so candidate scores differ only through actions.
    double best_value = -std::numeric_limits<double>::infinity();
    const Action* best = nullptr;
    for (const Action& candidate : candidates) {
      double total = 0.0;
      for (int r = 0; r < cfg_.n_rollouts; ++r) {
        const std::uint64_t rollout_key = fold_seq(decision_key, {2, static_cast<std::uint64_t>(r)});
        total += simulate(scenario, state, candidate, budget, rollout_key);
      }
      const double mean = total / cfg_.n_rollouts;
      if (mean > best_value) {  // strict: first (lexicographically smallest) wins ties
        best_value = mean;
        best = &candidate;
      }
    }
    return *best;
  }

 private:
  double simulate(const Scenario& scenario, const SimState& start, const Action& first,
                  int budget, std::uint64_t rollout_key) const {
    SimState s = start;
    double discount = 1.0;
    double total = scenario.step(s, first, budget, fold_seq(rollout_key, {9, 0})).utility;
    for (int h = 1; h <= cfg_.lookahead; ++h) {
      discount *= gamma_;
      const Action a = base_->decide(scenario, s, budget,
                                     Rng(fold_seq(rollout_key, {7, static_cast<std::uint64_t>(h)})));
      total += discount * scenario.step(s, a, budget, fold_seq(rollout_key, {9, static_cast<std::uint64_t>(h)})).utility;
    }
    return total;
  }

  std::shared_ptr<const Policy> base_;
  RolloutConfig cfg_;
  double gamma_;
};

}  // namespace

BaselineKind baseline_kind_from_name(const std::string& name) {
  if (name == "none") return BaselineKind::None;
  if (name == "random") return BaselineKind::Random;
  if (name == "old_first") return BaselineKind::OldFirst;
  if (name == "nearest_fire") return BaselineKind::NearestFire;
  throw ConfigError("unknown policy kind: " + name);
}

std::unique_ptr<Policy> make_baseline(BaselineKind kind, sim::Mode mode) {
  switch (kind) {
    case BaselineKind::None:
      return std::make_unique<NonePolicy>();
    case BaselineKind::Random:
      return std::make_unique<RandomPolicy>();
    case BaselineKind::OldFirst:
      if (mode != sim::Mode::Pandemic) throw ConfigError("old_first applies to pandemic mode only");
      return std::make_unique<OldFirstPolicy>();
    case BaselineKind::NearestFire:
      if (mode != sim::Mode::Wildfire) throw ConfigError("nearest_fire applies to wildfire mode only");
      return std::make_unique<NearestFirePolicy>();
  }
  throw ConfigError("unknown baseline kind");
}

std::unique_ptr<Policy> make_rollout_policy(std::shared_ptr<const Policy> base,
                                            RolloutConfig config, double gamma) {
  return std::make_unique<RolloutPolicy>(std::move(base), config, gamma);
}

}  // namespace dynum
