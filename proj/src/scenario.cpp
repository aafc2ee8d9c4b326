#include "dynum/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynum/errors.hpp"

namespace dynum {

namespace {

/// Samples `k` distinct node ids from [0, n) in ascending order.
std::vector<std::int32_t> sample_distinct(std::int32_t n, int k, Rng& rng) {
  std::vector<std::int32_t> all(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  rng.shuffle(all);
  all.resize(static_cast<std::size_t>(std::min<std::int32_t>(k, n)));
  std::sort(all.begin(), all.end());
  return all;
}

class PandemicScenario final : public Scenario {
 public:
  PandemicScenario(pandemic::SocialGraph sg, double dt, double gamma, int initial_infected)
      : sg_(std::move(sg)), gamma_(gamma), initial_infected_(initial_infected) {
    config_.dt = dt;
    sg_.graph.validate(dt);
    degree_.reserve(static_cast<std::size_t>(sg_.graph.node_count()));
    for (std::int32_t p = 0; p < sg_.graph.node_count(); ++p) {
      degree_.push_back(static_cast<int>(sg_.graph.in_edges(p).size()));
    }
  }

  sim::Mode mode() const override { return sim::Mode::Pandemic; }
  const sim::PropagationGraph& graph() const override { return sg_.graph; }
  double dt() const override { return config_.dt; }
  double discount() const override { return gamma_; }
  const pandemic::SocialGraph& social() const { return sg_; }

  SimState initial_state(std::uint64_t replica_key) const override {
    SimState s;
    s.cells = sim::make_all_susceptible(sg_.graph.node_count());
    Rng rng(fold(replica_key, StreamTag::InitialState));
    for (std::int32_t p : sample_distinct(sg_.graph.node_count(), initial_infected_, rng)) {
      s.cells.codes[static_cast<std::size_t>(p)] = sim::NodeState::Infected;
    }
    return s;
  }

  void set_budget(SimState&, int) const override {}

  std::vector<std::int32_t> action_mask(const SimState& state) const override {
    return pandemic::mask_actions(state.cells);
  }

  StepStats step(SimState& state, const Action& action, int budget,
                 std::uint64_t traj_key) const override {
    if (static_cast<int>(action.vaccinate.size()) > budget) {
      throw RejectedAction("vaccination set exceeds the epoch budget");
    }
    sim::ActionMask mask;
    if (!action.vaccinate.empty()) {
      mask.assign(state.cells.codes.size(), 0);
      for (std::int32_t p : action.vaccinate) mask[static_cast<std::size_t>(p)] = 1;
    }
    const auto before = sim::count_by_state(state.cells);
    std::vector<sim::NodeState> scratch;
    sim::step_epoch_inplace(sg_.graph, state.cells, mask, config_, sim::TrajectoryCtx{traj_key},
                            scratch);
    const auto after = sim::count_by_state(state.cells);
    StepStats st;
    st.new_deaths = static_cast<int>(after[2] - before[2]);
    st.new_infections = static_cast<int>(std::max<std::int64_t>(0, after[1] - before[1]));
    st.utility = -static_cast<double>(st.new_deaths);
    return st;
  }

  std::vector<Action> candidate_actions(const SimState& state, int budget, int max_candidates,
                                        Rng) const override {
    std::vector<Action> out;
    if (budget <= 0) return out;
    std::vector<std::int32_t> mask = pandemic::mask_actions(state.cells);
    if (mask.empty()) return out;
    // Rank susceptible nodes by degree * group mortality; stable ascending id
    // within equal scores.
    std::stable_sort(mask.begin(), mask.end(), [&](std::int32_t a, std::int32_t b) {
      return score(a) > score(b);
    });
    const int k = std::min<int>(max_candidates, static_cast<int>(mask.size()));
    for (int lead = 0; lead < k; ++lead) {
      Action a;
      a.vaccinate.push_back(mask[static_cast<std::size_t>(lead)]);
      for (std::size_t j = 0; static_cast<int>(a.vaccinate.size()) < budget && j < mask.size(); ++j) {
        if (static_cast<int>(j) != lead) a.vaccinate.push_back(mask[j]);
      }
      std::sort(a.vaccinate.begin(), a.vaccinate.end());
      out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  double score(std::int32_t p) const {
    return degree_[static_cast<std::size_t>(p)] *
           sg_.graph.params(p).death_prob;
  }

  pandemic::SocialGraph sg_;
  sim::EpochConfig config_;
  double gamma_;
  int initial_infected_;
  std::vector<int> degree_;
};

class WildfireScenario final : public Scenario {
 public:
  explicit WildfireScenario(WildfireScenarioConfig cfg)
      : spec_(std::move(cfg.grid)), gamma_(cfg.gamma), initial_fires_(cfg.initial_fires) {
    graph_ = wildfire::build_graph(spec_);
    config_.dt = spec_.dt;
    base_cell_ = spec_.cell_id(spec_.width / 2, spec_.height / 2);
  }

  sim::Mode mode() const override { return sim::Mode::Wildfire; }
  const sim::PropagationGraph& graph() const override { return graph_; }
  double dt() const override { return spec_.dt; }
  double discount() const override { return gamma_; }
  const wildfire::GridSpec* grid_spec() const override { return &spec_; }

  SimState initial_state(std::uint64_t replica_key) const override {
    SimState s;
    s.cells = sim::make_all_susceptible(spec_.cells());
    Rng rng(fold(replica_key, StreamTag::InitialState));
    for (std::int32_t p : sample_distinct(spec_.cells(), initial_fires_, rng)) {
      s.cells.codes[static_cast<std::size_t>(p)] = sim::NodeState::Infected;
    }
    s.units.max_step = spec_.max_step;
    return s;
  }

  void set_budget(SimState& state, int budget) const override {
    if (budget < 0) throw ConfigError("negative budget");
    auto& pos = state.units.positions;
    while (static_cast<int>(pos.size()) > budget) pos.pop_back();
    while (static_cast<int>(pos.size()) < budget) pos.push_back(base_cell_);
    state.units.max_step = spec_.max_step;
  }

  std::vector<std::int32_t> action_mask(const SimState& state) const override {
    std::vector<std::int32_t> burning;
    for (std::size_t p = 0; p < state.cells.codes.size(); ++p) {
      if (state.cells.codes[p] == sim::NodeState::Infected) {
        burning.push_back(static_cast<std::int32_t>(p));
      }
    }
    return burning;
  }

  StepStats step(SimState& state, const Action& action, int budget,
                 std::uint64_t traj_key) const override {
    if (static_cast<int>(state.units.positions.size()) != budget) {
      throw ContractViolation("unit roster does not match the budget; call set_budget");
    }
    std::vector<std::int32_t> targets = action.unit_targets;
    if (targets.empty() && budget > 0) targets = state.units.positions;  // stay in place
    auto moved = wildfire::move_and_extinguish(spec_, state.cells, state.units, targets);
    const sim::SystemState before = state.cells;
    std::vector<sim::NodeState> scratch;
    sim::step_epoch_inplace(graph_, state.cells, moved.actions, config_, sim::TrajectoryCtx{traj_key},
                            scratch);
    state.units = std::move(moved.units);
    StepStats st;
    st.extinguished = moved.extinguish_count;
    st.newly_ignited = wildfire::newly_ignited(before, state.cells);
    st.utility = spec_.extinguish_reward * st.extinguished - spec_.spread_penalty * st.newly_ignited;
    return st;
  }

  std::vector<Action> candidate_actions(const SimState& state, int budget, int max_candidates,
                                        Rng) const override {
    std::vector<Action> out;
    if (budget <= 0 || state.units.positions.empty()) return out;
    const std::vector<std::int32_t> burning = action_mask(state);
    if (burning.empty()) return out;

    // Joint moves: every unit steps toward one shared focus fire, for the
    // max_candidates closest fires; plus the spread assignment where each
    // unit tracks its own nearest fire.
    std::vector<std::int32_t> focus = burning;
    std::stable_sort(focus.begin(), focus.end(), [&](std::int32_t a, std::int32_t b) {
      return min_unit_distance(state, a) < min_unit_distance(state, b);
    });
    if (static_cast<int>(focus.size()) > max_candidates) focus.resize(static_cast<std::size_t>(max_candidates));

    for (std::int32_t f : focus) {
      Action a;
      for (std::int32_t pos : state.units.positions) a.unit_targets.push_back(step_toward(pos, f));
      out.push_back(std::move(a));
    }
    Action spread;
    for (std::int32_t pos : state.units.positions) {
      std::int32_t best = pos;
      int best_d = std::numeric_limits<int>::max();
      for (std::int32_t b : burning) {
        const int d = wildfire::chebyshev(spec_, pos, b);
        if (d < best_d) {
          best_d = d;
          best = b;
        }
      }
      spread.unit_targets.push_back(step_toward(pos, best));
    }
    out.push_back(std::move(spread));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// One Chebyshev step from `from` toward `to`, clipped by max_step.
  std::int32_t step_toward(std::int32_t from, std::int32_t to) const {
    const int steps = spec_.max_step;
    int x = spec_.cell_x(from), y = spec_.cell_y(from);
    const int tx = spec_.cell_x(to), ty = spec_.cell_y(to);
    x += std::clamp(tx - x, -steps, steps);
    y += std::clamp(ty - y, -steps, steps);
    return spec_.cell_id(x, y);
  }

 private:
  int min_unit_distance(const SimState& state, std::int32_t cell) const {
    int best = std::numeric_limits<int>::max();
    for (std::int32_t pos : state.units.positions) {
      best = std::min(best, wildfire::chebyshev(spec_, pos, cell));
    }
    return best;
  }

  wildfire::GridSpec spec_;
  sim::PropagationGraph graph_;
  sim::EpochConfig config_;
  double gamma_;
  int initial_fires_;
  std::int32_t base_cell_ = 0;
};

}  // namespace

std::unique_ptr<Scenario> make_pandemic_scenario(const PandemicScenarioConfig& cfg,
                                                 std::uint64_t graph_seed) {
  auto sg = pandemic::generate_social_graph(cfg.demographics, graph_seed);
  return std::make_unique<PandemicScenario>(std::move(sg), cfg.dt, cfg.gamma, cfg.initial_infected);
}

std::unique_ptr<Scenario> make_pandemic_scenario(pandemic::SocialGraph graph, double dt,
                                                 double gamma, int initial_infected) {
  return std::make_unique<PandemicScenario>(std::move(graph), dt, gamma, initial_infected);
}

std::unique_ptr<Scenario> make_wildfire_scenario(const WildfireScenarioConfig& cfg) {
  return std::make_unique<WildfireScenario>(cfg);
}

}  // namespace dynum
