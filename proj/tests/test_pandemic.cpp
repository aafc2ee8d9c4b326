#include <doctest.h>

#include <cmath>
#include <set>

#include "dynum/errors.hpp"
#include "dynum/pandemic.hpp"
#include "dynum/scenario.hpp"

using namespace dynum;
using namespace dynum::pandemic;

namespace {

DemographicSpec spec_for(int teens, int adults, int elderly, double er_prob) {
  DemographicSpec d;
  d.n_teen = teens;
  d.n_adult = adults;
  d.n_elderly = elderly;
  d.er_edge_prob = er_prob;
  return d;
}

// Table I demographics (teens, adults, elderly, elderly average degree).
struct LocRow {
  int teens, adults, elderly;
  double ead;
};
constexpr LocRow kTableI[] = {
    {20, 50, 30, 7.56}, {30, 60, 10, 6.7}, {20, 60, 20, 8.55}, {20, 60, 20, 8.7}, {30, 60, 10, 7.3}};

}  // namespace

TEST_SUITE_BEGIN("pandemic");

TEST_CASE("generated graphs are connected across seeds and specs") {
  for (const LocRow& row : kTableI) {
    DemographicSpec d = spec_for(row.teens, row.adults, row.elderly, 0.08);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const SocialGraph sg = generate_social_graph(d, seed);
      REQUIRE(is_connected(sg.graph));
    }
  }
  // Sparse ER still ends up connected through bridging.
  DemographicSpec sparse = spec_for(4, 30, 10, 0.001);
  for (std::uint64_t seed = 0; seed < 600; ++seed) {
    REQUIRE(is_connected(generate_social_graph(sparse, seed).graph));
  }
}

TEST_CASE("elderly average degree calibrates to the Loc.1 target") {
  DemographicSpec d = spec_for(20, 50, 30, -1.0);
  d.target_ead = 7.56;
  double acc = 0.0;
  const int reps = 10;
  for (int i = 0; i < reps; ++i) acc += elderly_avg_degree(generate_social_graph(d, 1000 + i));
  CHECK(std::fabs(acc / reps - 7.56) <= 0.5);
}

TEST_CASE("two adults and nothing else force the unique connected graph") {
  const SocialGraph sg = generate_social_graph(spec_for(0, 2, 0, 0.0), 5);
  CHECK(sg.graph.node_count() == 2);
  CHECK(sg.graph.in_edges(0).size() == 1);
  CHECK(sg.graph.in_edges(1).size() == 1);
  CHECK(is_connected(sg.graph));
}

TEST_CASE("graph generation is deterministic per seed (byte-identical)") {
  DemographicSpec d = spec_for(10, 20, 10, 0.1);
  const SocialGraph a = generate_social_graph(d, 77);
  const SocialGraph b = generate_social_graph(d, 77);
  CHECK(a.graph.to_text() == b.graph.to_text());
  const SocialGraph c = generate_social_graph(d, 78);
  CHECK(a.graph.to_text() != c.graph.to_text());
}

TEST_CASE("zero-node spec is rejected") {
  CHECK_THROWS_AS(generate_social_graph(spec_for(0, 0, 0, 0.1), 1), ConfigError);
}

TEST_CASE("node parameters follow group mortality and recovery settings") {
  DemographicSpec d = spec_for(2, 2, 2, 0.5);
  const SocialGraph sg = generate_social_graph(d, 3);
  CHECK(sg.graph.params(0).death_prob == doctest::Approx(0.001));   // teen
  CHECK(sg.graph.params(2).death_prob == doctest::Approx(0.01));    // adult
  CHECK(sg.graph.params(4).death_prob == doctest::Approx(0.1));     // elderly
  for (int p = 0; p < 6; ++p) {
    CHECK(sg.graph.params(p).recovery_prob == doctest::Approx(1.0 / 14.0));
  }
  CHECK(sg.graph.tag(0) == "teen");
  CHECK(sg.graph.tag(5) == "elderly");
}

TEST_CASE("pandemic utility is negative new deaths") {
  // Deaths 3 -> 5 across the epoch: utility -2.
  sim::SystemState prev, next;
  prev.codes = {sim::NodeState::Infected, sim::NodeState::Infected, sim::NodeState::Dead,
                sim::NodeState::Dead, sim::NodeState::Dead};
  next = prev;
  next.codes[0] = sim::NodeState::Dead;
  next.codes[1] = sim::NodeState::Dead;
  CHECK(pandemic_utility(prev, next) == doctest::Approx(-2.0));
  // No new deaths on either side: 0.
  next.codes[0] = sim::NodeState::Recovered;
  next.codes[1] = sim::NodeState::Infected;
  CHECK(pandemic_utility(prev, next) == doctest::Approx(0.0));

  sim::SystemState shorter;
  shorter.codes = {sim::NodeState::Susceptible};
  CHECK_THROWS_AS(pandemic_utility(prev, shorter), ContractViolation);
}

TEST_CASE("full-horizon utility sum with gamma=1 telescopes to total deaths") {
  DemographicSpec d = spec_for(6, 12, 6, 0.2);
  const SocialGraph sg = generate_social_graph(d, 11);
  auto scenario = make_pandemic_scenario(sg, 1.0, 1.0, 3);
  SimState s = scenario->initial_state(fold(5, 1));
  double total_utility = 0.0;
  for (int t = 0; t < 30; ++t) {
    total_utility += scenario->step(s, Action{}, 0, fold(5, 2)).utility;
  }
  const auto hist = sim::count_by_state(s.cells);
  CHECK(total_utility == doctest::Approx(-static_cast<double>(hist[2])));
}

TEST_CASE("mask_actions returns exactly the susceptible ids") {
  sim::SystemState s;
  s.codes = {sim::NodeState::Susceptible, sim::NodeState::Infected, sim::NodeState::Dead,
             sim::NodeState::Vaccinated, sim::NodeState::Recovered};
  CHECK(mask_actions(s) == std::vector<std::int32_t>{0});
  s.codes.assign(4, sim::NodeState::Vaccinated);
  CHECK(mask_actions(s).empty());
  s.codes.assign(4, sim::NodeState::Susceptible);
  CHECK(mask_actions(s) == std::vector<std::int32_t>{0, 1, 2, 3});
}

TEST_CASE("vaccinating everyone at t=0 confines deaths to the initially infected") {
  DemographicSpec d = spec_for(8, 16, 8, 0.15);
  const SocialGraph sg = generate_social_graph(d, 21);
  auto scenario = make_pandemic_scenario(sg, 1.0, 1.0, 5);
  const int n = sg.graph.node_count();
  for (int rep = 0; rep < 200; ++rep) {
    SimState s = scenario->initial_state(fold(33, rep));
    std::set<std::int32_t> initially_infected;
    for (std::int32_t p = 0; p < n; ++p) {
      if (s.cells.codes[static_cast<std::size_t>(p)] == sim::NodeState::Infected) {
        initially_infected.insert(p);
      }
    }
    Action vaccinate_all;
    vaccinate_all.vaccinate = pandemic::mask_actions(s.cells);
    scenario->step(s, vaccinate_all, n, fold(34, rep));
    for (int t = 1; t < 40; ++t) scenario->step(s, Action{}, 0, fold(34, rep));
    for (std::int32_t p = 0; p < n; ++p) {
      if (s.cells.codes[static_cast<std::size_t>(p)] == sim::NodeState::Dead) {
        REQUIRE(initially_infected.count(p) == 1);
      }
    }
  }
}

TEST_SUITE_END();
