#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dynum/contagion.hpp"
#include "dynum/pandemic.hpp"
#include "dynum/rng.hpp"
#include "dynum/wildfire.hpp"

namespace dynum {

/// Full simulation state of one site. `units` is empty in pandemic mode.
struct SimState {
  sim::SystemState cells;
  wildfire::UnitState units;

  bool operator==(const SimState& o) const {
    return cells == o.cells && units.positions == o.units.positions;
  }
};

/// A per-epoch decision. Pandemic: node ids to vaccinate (ascending, at most
/// the budget). Wildfire: one destination cell per unit.
struct Action {
  std::vector<std::int32_t> vaccinate;
  std::vector<std::int32_t> unit_targets;

  bool operator==(const Action&) const = default;
  bool operator<(const Action& o) const {
    if (vaccinate != o.vaccinate) return vaccinate < o.vaccinate;
    return unit_targets < o.unit_targets;
  }
};

struct StepStats {
  double utility = 0.0;
  int new_deaths = 0;       // pandemic
  int new_infections = 0;   // pandemic
  int newly_ignited = 0;    // wildfire
  int extinguished = 0;     // wildfire
};

/// One site's Markov model: how states are initialized, what actions are
/// feasible, and how one decision epoch evolves. Implementations are
/// immutable and safe to share across threads.
class Scenario {
 public:
  virtual ~Scenario() = default;

  virtual sim::Mode mode() const = 0;
  virtual const sim::PropagationGraph& graph() const = 0;
  virtual double dt() const = 0;
  virtual double discount() const = 0;

  /// Fresh ground state; randomized initial conditions come from replica_key.
  virtual SimState initial_state(std::uint64_t replica_key) const = 0;

  /// Adjusts the state so the per-epoch resource budget is `budget`
  /// (wildfire: grows/shrinks the unit roster; pandemic: no-op).
  virtual void set_budget(SimState& state, int budget) const = 0;

  /// Feasible action targets in this state (susceptible ids / burning cells).
  virtual std::vector<std::int32_t> action_mask(const SimState& state) const = 0;

  /// Advances one epoch under `action`, enforcing budget and legality.
  virtual StepStats step(SimState& state, const Action& action, int budget,
                         std::uint64_t traj_key) const = 0;

  /// Heuristically scored candidate actions for rollout lookahead; at most
  /// `max_candidates` entries, deterministic given `rng`.
  virtual std::vector<Action> candidate_actions(const SimState& state, int budget,
                                                int max_candidates, Rng rng) const = 0;

  /// Grid geometry for wildfire scenarios; nullptr in pandemic mode.
  virtual const wildfire::GridSpec* grid_spec() const { return nullptr; }
};

struct PandemicScenarioConfig {
  pandemic::DemographicSpec demographics;
  double dt = 1.0;
  double gamma = 0.99;
  int initial_infected = 5;
};

struct WildfireScenarioConfig {
  wildfire::GridSpec grid;  // must be materialized before construction
  double gamma = 0.95;
  int initial_fires = 3;
};

std::unique_ptr<Scenario> make_pandemic_scenario(const PandemicScenarioConfig& cfg,
                                                 std::uint64_t graph_seed);
std::unique_ptr<Scenario> make_pandemic_scenario(pandemic::SocialGraph graph, double dt,
                                                 double gamma, int initial_infected);
std::unique_ptr<Scenario> make_wildfire_scenario(const WildfireScenarioConfig& cfg);

}  // namespace dynum
