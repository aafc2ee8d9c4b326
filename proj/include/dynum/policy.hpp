#pragma once

#include <memory>
#include <string>

#include "dynum/rng.hpp"
#include "dynum/scenario.hpp"

namespace dynum {

/// A (possibly randomized) mapping from observed state to a feasible action.
/// Implementations must stay inside the scenario's action mask and budget.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual Action decide(const Scenario& scenario, const SimState& state, int budget,
                        Rng rng) const = 0;
};

enum class BaselineKind { None, Random, OldFirst, NearestFire };

BaselineKind baseline_kind_from_name(const std::string& name);

/// Heuristic baselines. Throws ConfigError when the kind does not apply to the
/// mode (old_first is pandemic-only, nearest_fire wildfire-only).
std::unique_ptr<Policy> make_baseline(BaselineKind kind, sim::Mode mode);

struct RolloutConfig {
  int n_rollouts = 2;       // trajectories simulated per candidate action
  int lookahead = 10;       // epochs simulated past the candidate step
  int max_candidates = 8;   // heuristic candidates considered besides the base action
};

/// One-step lookahead improvement over a base policy: candidate actions are
/// scored by Monte Carlo rollouts that follow the base policy afterwards,
/// with common random numbers across candidates. Ties pick the
/// lexicographically smallest action.
std::unique_ptr<Policy> make_rollout_policy(std::shared_ptr<const Policy> base,
                                            RolloutConfig config, double gamma);

}  // namespace dynum
