#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "dynum/errors.hpp"
#include "dynum/evaluate.hpp"
#include "dynum/pandemic.hpp"
#include "dynum/policy.hpp"
#include "dynum/scenario.hpp"

using namespace dynum;

namespace {

std::shared_ptr<const Scenario> small_pandemic(std::uint64_t seed, int initial_infected = 3,
                                               double gamma = 1.0) {
  pandemic::DemographicSpec d;
  d.n_teen = 6;
  d.n_adult = 14;
  d.n_elderly = 8;
  d.er_edge_prob = 0.12;
  auto sg = pandemic::generate_social_graph(d, seed);
  return std::shared_ptr<const Scenario>(
      make_pandemic_scenario(std::move(sg), 1.0, gamma, initial_infected));
}

std::shared_ptr<const Scenario> small_wildfire(std::uint64_t seed) {
  wildfire::GridSpec g;
  g.width = 8;
  g.height = 8;
  g.veg_type.clear();
  g.veg_density.clear();
  g.materialize(seed);
  WildfireScenarioConfig cfg;
  cfg.grid = g;
  cfg.initial_fires = 2;
  return std::shared_ptr<const Scenario>(make_wildfire_scenario(cfg));
}

}  // namespace

TEST_SUITE_BEGIN("policy");

TEST_CASE("none policy emits no targets; random fills the mask when budget allows") {
  auto scenario = small_pandemic(1);
  const SimState s = scenario->initial_state(fold(9, 0));
  const auto none = make_baseline(BaselineKind::None, sim::Mode::Pandemic);
  CHECK(none->decide(*scenario, s, 5, Rng(1)).vaccinate.empty());

  const auto random = make_baseline(BaselineKind::Random, sim::Mode::Pandemic);
  const auto mask = scenario->action_mask(s);
  const Action full = random->decide(*scenario, s, static_cast<int>(mask.size()) + 10, Rng(2));
  CHECK(full.vaccinate == mask);  // budget >= |mask|: everything selected
  const Action partial = random->decide(*scenario, s, 3, Rng(3));
  CHECK(partial.vaccinate.size() == 3);
  for (std::int32_t p : partial.vaccinate) {
    CHECK(std::find(mask.begin(), mask.end(), p) != mask.end());
  }
}

TEST_CASE("old_first vaccinates the only susceptible elderly with probability 1") {
  auto scenario = small_pandemic(2);
  SimState s = scenario->initial_state(fold(10, 0));
  const auto& graph = scenario->graph();
  // Vaccinate every elderly node except one, so exactly one remains in the mask.
  std::int32_t keep = -1;
  for (std::int32_t p = 0; p < graph.node_count(); ++p) {
    if (graph.tag(p) == "elderly" &&
        s.cells.codes[static_cast<std::size_t>(p)] == sim::NodeState::Susceptible) {
      if (keep < 0) {
        keep = p;
      } else {
        s.cells.codes[static_cast<std::size_t>(p)] = sim::NodeState::Vaccinated;
      }
    }
  }
  REQUIRE(keep >= 0);
  const auto old_first = make_baseline(BaselineKind::OldFirst, sim::Mode::Pandemic);
  for (int i = 0; i < 20; ++i) {
    const Action a = old_first->decide(*scenario, s, 1, Rng(fold(4, i)));
    REQUIRE(a.vaccinate == std::vector<std::int32_t>{keep});
  }
}

TEST_CASE("policy kind / scenario mode mismatches are configuration errors") {
  CHECK_THROWS_AS(make_baseline(BaselineKind::OldFirst, sim::Mode::Wildfire), ConfigError);
  CHECK_THROWS_AS(make_baseline(BaselineKind::NearestFire, sim::Mode::Pandemic), ConfigError);
  CHECK_THROWS_AS(baseline_kind_from_name("ppo"), ConfigError);
  CHECK_THROWS_AS(
      make_rollout_policy(make_baseline(BaselineKind::None, sim::Mode::Pandemic),
                          RolloutConfig{0, 5, 4}, 0.99),
      ConfigError);
}

TEST_CASE("feasibility fuzz: every emitted action is inside the mask and budget") {
  auto pan = small_pandemic(3);
  auto wild = small_wildfire(4);
  std::vector<std::unique_ptr<Policy>> pan_policies;
  pan_policies.push_back(make_baseline(BaselineKind::None, sim::Mode::Pandemic));
  pan_policies.push_back(make_baseline(BaselineKind::Random, sim::Mode::Pandemic));
  pan_policies.push_back(make_baseline(BaselineKind::OldFirst, sim::Mode::Pandemic));
  std::vector<std::unique_ptr<Policy>> wild_policies;
  wild_policies.push_back(make_baseline(BaselineKind::None, sim::Mode::Wildfire));
  wild_policies.push_back(make_baseline(BaselineKind::Random, sim::Mode::Wildfire));
  wild_policies.push_back(make_baseline(BaselineKind::NearestFire, sim::Mode::Wildfire));

  Rng rng(515);
  int checked = 0;
  for (int trial = 0; trial < 12500; ++trial) {
    // Random reachable states: evolve a fresh replica a random number of epochs.
    SimState ps = pan->initial_state(fold(100, trial));
    const int epochs = static_cast<int>(rng.uniform_int(8));
    for (int t = 0; t < epochs; ++t) pan->step(ps, Action{}, 0, fold(101, trial));
    const auto mask = pan->action_mask(ps);
    const std::set<std::int32_t> mask_set(mask.begin(), mask.end());
    const int budget = static_cast<int>(rng.uniform_int(5));
    for (const auto& policy : pan_policies) {
      const Action a = policy->decide(*pan, ps, budget, Rng(rng.next_u64()));
      REQUIRE(static_cast<int>(a.vaccinate.size()) <= budget);
      for (std::int32_t p : a.vaccinate) REQUIRE(mask_set.count(p) == 1);
      ++checked;
    }

    SimState ws = wild->initial_state(fold(102, trial));
    const int units = static_cast<int>(rng.uniform_int(4));
    wild->set_budget(ws, units);
    for (int t = 0; t < static_cast<int>(rng.uniform_int(4)); ++t) {
      wild->step(ws, Action{}, units, fold(103, trial));
    }
    for (const auto& policy : wild_policies) {
      const Action a = policy->decide(*wild, ws, units, Rng(rng.next_u64()));
      REQUIRE(a.unit_targets.size() == ws.units.positions.size());
      const auto* grid = wild->grid_spec();
      for (std::size_t u = 0; u < a.unit_targets.size(); ++u) {
        REQUIRE(wildfire::chebyshev(*grid, ws.units.positions[u], a.unit_targets[u]) <=
                ws.units.max_step);
      }
      ++checked;
    }
  }
  CHECK(checked >= 75000);
}

TEST_CASE("rollout picks the dominating action in a deterministic chain") {
  // Node 0 infected and dying (d=1); node 1 is certainly contacted (w*dt=1)
  // and would then die; node 2 is isolated. Vaccinating node 1 is dominant.
  sim::PropagationGraph g(sim::Mode::Pandemic, 3);
  g.add_edge(1, 0, 1.0);
  g.set_params(0, sim::NodeParams{1.0, 0.0});
  g.set_params(1, sim::NodeParams{1.0, 0.0});
  g.set_params(2, sim::NodeParams{1.0, 0.0});
  pandemic::SocialGraph sg;
  sg.graph = std::move(g);
  sg.groups = {pandemic::AgeGroup::Adult, pandemic::AgeGroup::Adult, pandemic::AgeGroup::Adult};
  auto scenario = std::shared_ptr<const Scenario>(make_pandemic_scenario(sg, 1.0, 1.0, 0));

  SimState s;
  s.cells = sim::make_all_susceptible(3);
  s.cells.codes[0] = sim::NodeState::Infected;

  for (int n_rollouts : {1, 2, 5}) {
    auto rollout = make_rollout_policy(make_baseline(BaselineKind::None, sim::Mode::Pandemic),
                                       RolloutConfig{n_rollouts, 3, 4}, 1.0);
    const Action a = rollout->decide(*scenario, s, 1, Rng(fold(77, n_rollouts)));
    REQUIRE(a.vaccinate == std::vector<std::int32_t>{1});
  }
}

TEST_CASE("rollout over an empty mask returns the empty action") {
  auto scenario = small_pandemic(6);
  SimState s = scenario->initial_state(fold(1, 1));
  for (auto& code : s.cells.codes) code = sim::NodeState::Vaccinated;
  auto rollout = make_rollout_policy(make_baseline(BaselineKind::None, sim::Mode::Pandemic),
                                     RolloutConfig{2, 3, 4}, 1.0);
  CHECK(rollout->decide(*scenario, s, 2, Rng(5)).vaccinate.empty());
}

TEST_CASE("rollout(none) improves on none in paired comparison") {
  auto scenario = small_pandemic(7, 3);
  const auto none = make_baseline(BaselineKind::None, sim::Mode::Pandemic);
  const auto rollout = make_rollout_policy(
      make_baseline(BaselineKind::None, sim::Mode::Pandemic), RolloutConfig{2, 6, 6}, 1.0);

  EvaluateOptions opts;
  opts.horizon = 25;
  opts.gamma = 1.0;
  opts.n_replicas = 2000;
  opts.workers = 0;
  const auto base_samples = evaluate_F_samples(*scenario, *none, 1, opts, 4242);
  const auto roll_samples = evaluate_F_samples(*scenario, *rollout, 1, opts, 4242);
  double mean_diff = 0.0;
  for (std::size_t i = 0; i < base_samples.size(); ++i) {
    mean_diff += roll_samples[i] - base_samples[i];
  }
  mean_diff /= static_cast<double>(base_samples.size());
  double var = 0.0;
  for (std::size_t i = 0; i < base_samples.size(); ++i) {
    const double d = roll_samples[i] - base_samples[i] - mean_diff;
    var += d * d;
  }
  const double se = std::sqrt(var / (base_samples.size() - 1)) /
                    std::sqrt(static_cast<double>(base_samples.size()));
  // One-sided: rollout utility is significantly higher (fewer deaths).
  CHECK(mean_diff > 2.33 * se);
}

TEST_CASE("evaluate_F at y=0 is identical for every policy (no actions possible)") {
  auto scenario = small_pandemic(8);
  EvaluateOptions opts;
  opts.horizon = 20;
  opts.gamma = 1.0;
  opts.n_replicas = 300;
  const auto none = make_baseline(BaselineKind::None, sim::Mode::Pandemic);
  const auto old_first = make_baseline(BaselineKind::OldFirst, sim::Mode::Pandemic);
  const auto a = evaluate_F(*scenario, *none, 0, opts, 99);
  const auto b = evaluate_F(*scenario, *old_first, 0, opts, 99);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("evaluate_F is exactly zero when deaths are impossible") {
  sim::PropagationGraph g(sim::Mode::Pandemic, 2);
  g.add_edge(1, 0, 0.5);
  pandemic::SocialGraph sg;
  sg.graph = std::move(g);
  sg.groups = {pandemic::AgeGroup::Adult, pandemic::AgeGroup::Adult};
  auto scenario = std::shared_ptr<const Scenario>(make_pandemic_scenario(sg, 1.0, 1.0, 1));
  const auto none = make_baseline(BaselineKind::None, sim::Mode::Pandemic);
  EvaluateOptions opts;
  opts.horizon = 1;
  opts.gamma = 1.0;
  opts.n_replicas = 500;
  const auto est = evaluate_F(*scenario, *none, 0, opts, 5);
  CHECK(est.mean == 0.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("evaluate_F is independent of the worker count") {
  auto scenario = small_pandemic(9);
  const auto old_first = make_baseline(BaselineKind::OldFirst, sim::Mode::Pandemic);
  EvaluateOptions opts;
  opts.horizon = 15;
  opts.gamma = 0.98;
  opts.n_replicas = 400;
  opts.workers = 1;
  const auto serial = evaluate_F_samples(*scenario, *old_first, 2, opts, 321);
  opts.workers = 4;
  const auto parallel = evaluate_F_samples(*scenario, *old_first, 2, opts, 321);
  CHECK(serial == parallel);
}

TEST_CASE("mean utility is non-decreasing in budget for old_first (trend test)") {
  auto scenario = small_pandemic(10, 4);
  const auto old_first = make_baseline(BaselineKind::OldFirst, sim::Mode::Pandemic);
  EvaluateOptions opts;
  opts.horizon = 25;
  opts.gamma = 1.0;
  opts.n_replicas = 3000;
  std::vector<FEstimate> curve;
  for (int y = 0; y <= 3; ++y) {
    curve.push_back(evaluate_F(*scenario, *old_first, y, opts, 2222));
  }
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    CHECK(curve[i + 1].mean >=
          curve[i].mean - 3.0 * (curve[i].std_error + curve[i + 1].std_error));
  }
}

TEST_SUITE_END();
