#include <doctest.h>

#include <cmath>
#include <set>

#include "dynum/contagion.hpp"
#include "dynum/errors.hpp"
#include "dynum/rng.hpp"

using namespace dynum;
using namespace dynum::sim;

namespace {

// Two nodes, A=0 infected, B=1 susceptible, directed edge B <- A.
PropagationGraph two_node_graph(double rate, double dA = 0.0, double rA = 0.0) {
  PropagationGraph g(Mode::Pandemic, 2);
  g.add_edge(1, 0, rate);
  g.set_params(0, NodeParams{dA, rA});
  return g;
}

SystemState two_node_state() {
  SystemState s = make_all_susceptible(2);
  s.codes[0] = NodeState::Infected;
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("contagion");

TEST_CASE("sub-interval infection probability equals the single Bernoulli contact") {
  // w*dt = 0.25: exact enumeration gives P(B infected) = 0.25 per sub-interval.
  const PropagationGraph g = two_node_graph(0.5);
  const SystemState s0 = two_node_state();
  const double dt = 0.5;
  const int n = 100000;
  int infected = 0;
  for (int rep = 0; rep < n; ++rep) {
    const SystemState s1 = step_subinterval(g, s0, {}, 0, dt, TrajectoryCtx{fold(42, rep)});
    infected += s1.codes[1] == NodeState::Infected ? 1 : 0;
  }
  const double p = 0.25;
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::fabs(infected / static_cast<double>(n) - p) < 3 * se);
}

TEST_CASE("absorbing codes never change") {
  PropagationGraph g = two_node_graph(1.0, 1.0, 0.0);
  for (NodeState code : {NodeState::Dead, NodeState::Vaccinated, NodeState::Recovered}) {
    SystemState s = two_node_state();
    s.codes[1] = code;
    const EpochConfig cfg{0.5, 0};
    for (int t = 0; t < 5; ++t) s = step_epoch(g, s, {}, cfg, TrajectoryCtx{7});
    CHECK(s.codes[1] == code);
  }
}

TEST_CASE("pandemic action vaccinates a susceptible node deterministically at i=0") {
  const PropagationGraph g = two_node_graph(0.0);
  const SystemState s0 = two_node_state();
  ActionMask act(2, 0);
  act[1] = 1;
  for (int rep = 0; rep < 50; ++rep) {
    const SystemState s1 = step_subinterval(g, s0, act, 0, 1.0, TrajectoryCtx{fold(1, rep)});
    CHECK(s1.codes[1] == NodeState::Vaccinated);
  }
}

TEST_CASE("vaccination preempts infection within sub-interval 0") {
  // Certain contact (w*dt = 1) but the vaccine is applied first.
  const PropagationGraph g = two_node_graph(1.0);
  const SystemState s0 = two_node_state();
  ActionMask act(2, 0);
  act[1] = 1;
  const SystemState s1 = step_subinterval(g, s0, act, 0, 1.0, TrajectoryCtx{3});
  CHECK(s1.codes[1] == NodeState::Vaccinated);
}

TEST_CASE("epoch infection probability matches 1-(1-w dt)^(1/dt)") {
  // w = 0.5, dt = 0.5: P = 1 - 0.75^2 = 0.4375 (closed-form product of misses).
  const PropagationGraph g = two_node_graph(0.5);
  const SystemState s0 = two_node_state();
  const EpochConfig cfg{0.5, 0};
  const int n = 100000;
  int infected = 0;
  for (int rep = 0; rep < n; ++rep) {
    const SystemState s1 = step_epoch(g, s0, {}, cfg, TrajectoryCtx{fold(99, rep)});
    infected += s1.codes[1] == NodeState::Infected ? 1 : 0;
  }
  const double p = 0.4375;
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::fabs(infected / static_cast<double>(n) - p) < 3 * se);
  CHECK(infected > 0);
}

TEST_CASE("graph with no edges never infects") {
  PropagationGraph g(Mode::Pandemic, 4);
  SystemState s = make_all_susceptible(4);
  s.codes[2] = NodeState::Infected;
  const EpochConfig cfg{1.0, 0};
  const SystemState s1 = step_epoch(g, s, {}, cfg, TrajectoryCtx{5});
  CHECK(count_by_state(s1)[0] == 3);
}

TEST_CASE("all-vaccinated state is a fixed point") {
  PropagationGraph g = two_node_graph(1.0);
  SystemState s = make_all_susceptible(2);
  s.codes[0] = s.codes[1] = NodeState::Vaccinated;
  const SystemState s1 = step_epoch(g, s, {}, EpochConfig{1.0, 0}, TrajectoryCtx{5});
  CHECK(s1.codes == s.codes);
}

TEST_CASE("count_by_state is an exact histogram") {
  SystemState s;
  s.codes = {NodeState::Susceptible, NodeState::Infected, NodeState::Dead};
  const auto h = count_by_state(s);
  CHECK(h[0] == 1);
  CHECK(h[1] == 1);
  CHECK(h[2] == 1);
  CHECK(h[3] == 0);
  CHECK(h[4] == 0);

  CHECK(count_by_state(SystemState{})[0] == 0);

  SystemState all = make_all_susceptible(100);
  CHECK(count_by_state(all)[0] == 100);
}

TEST_CASE("dt refinement: epoch probability converges to 1-(1-w dt)^(1/dt)") {
  for (double dt : {1.0, 0.5, 0.1}) {
    const double w = 0.4;
    const PropagationGraph g = two_node_graph(w);
    const SystemState s0 = two_node_state();
    const EpochConfig cfg{dt, 0};
    const int n = 20000;
    int infected = 0;
    for (int rep = 0; rep < n; ++rep) {
      const SystemState s1 = step_epoch(g, s0, {}, cfg, TrajectoryCtx{fold(11, rep)});
      infected += s1.codes[1] == NodeState::Infected ? 1 : 0;
    }
    const double p = 1.0 - std::pow(1.0 - w * dt, 1.0 / dt);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(infected / static_cast<double>(n) - p) < 3 * se);
  }
}

TEST_CASE("errors: invalid dt, rate-sum violation, illegal actions") {
  CHECK_THROWS_AS((EpochConfig{0.3, 0}.substeps()), ConfigError);
  CHECK_THROWS_AS((EpochConfig{-1.0, 0}.substeps()), ConfigError);

  PropagationGraph g(Mode::Pandemic, 3);
  g.add_edge(0, 1, 0.8);
  g.add_edge(0, 2, 0.8);  // rate sum 1.6 at node 0
  SystemState s = make_all_susceptible(3);
  CHECK_THROWS_AS(step_epoch(g, s, {}, EpochConfig{1.0, 0}, TrajectoryCtx{1}), ConfigError);
  CHECK_NOTHROW(step_epoch(g, s, {}, EpochConfig{0.5, 0}, TrajectoryCtx{1}));

  // Vaccinating a non-susceptible node is rejected.
  PropagationGraph g2 = two_node_graph(0.0);
  SystemState s2 = two_node_state();
  ActionMask act(2, 0);
  act[0] = 1;  // node 0 is infected
  CHECK_THROWS_AS(step_subinterval(g2, s2, act, 0, 1.0, TrajectoryCtx{1}), RejectedAction);

  // Extinguishing a non-burning cell is rejected.
  PropagationGraph wf(Mode::Wildfire, 2);
  SystemState s3 = make_all_susceptible(2);
  ActionMask act3(2, 0);
  act3[0] = 1;
  CHECK_THROWS_AS(step_subinterval(wf, s3, act3, 0, 1.0, TrajectoryCtx{1}), RejectedAction);

  // Actions at sub-interval > 0 violate the contract.
  ActionMask act4(2, 0);
  act4[1] = 1;
  CHECK_THROWS_AS(step_subinterval(g2, s2, act4, 1, 1.0, TrajectoryCtx{1}), ContractViolation);

  // Duplicate edges are configuration errors.
  PropagationGraph dup(Mode::Pandemic, 2);
  dup.add_edge(0, 1, 0.1);
  CHECK_THROWS_AS(dup.add_edge(0, 1, 0.1), ConfigError);

  // Wildfire graphs reject recovery.
  PropagationGraph wf2(Mode::Wildfire, 1);
  CHECK_THROWS_AS(wf2.set_params(0, NodeParams{0.1, 0.2}), ConfigError);
}

TEST_CASE("wildfire action extinguishes a burning cell at i=0") {
  PropagationGraph g(Mode::Wildfire, 2);
  g.add_edge(1, 0, 0.3);
  g.set_params(0, NodeParams{0.2, 0.0});
  SystemState s = make_all_susceptible(2);
  s.codes[0] = NodeState::Infected;
  ActionMask act(2, 0);
  act[0] = 1;
  const SystemState s1 = step_subinterval(g, s, act, 0, 0.25, TrajectoryCtx{17});
  CHECK(s1.codes[0] == NodeState::Vaccinated);
}

TEST_CASE("identical seeds give identical trajectories") {
  PropagationGraph g(Mode::Pandemic, 20);
  for (std::int32_t i = 0; i + 1 < 20; ++i) g.add_contact(i, i + 1, 0.3);
  for (std::int32_t i = 0; i < 20; ++i) g.set_params(i, NodeParams{0.05, 0.1});
  SystemState s = make_all_susceptible(20);
  s.codes[10] = NodeState::Infected;
  const EpochConfig cfg{0.5, 0};

  SystemState a = s, b = s;
  for (int t = 0; t < 30; ++t) {
    a = step_epoch(g, a, {}, cfg, TrajectoryCtx{1234});
    b = step_epoch(g, b, {}, cfg, TrajectoryCtx{1234});
    REQUIRE(a == b);
  }
  // A different trajectory key diverges with overwhelming probability.
  SystemState c = s;
  bool diverged = false;
  for (int t = 0; t < 30; ++t) {
    c = step_epoch(g, c, {}, cfg, TrajectoryCtx{999});
    a = step_epoch(g, a, {}, cfg, TrajectoryCtx{1234});
    if (!(c == a)) diverged = true;
  }
  CHECK(diverged);
}

TEST_CASE("graph text serialization round-trips") {
  PropagationGraph g(Mode::Pandemic, 3);
  g.add_contact(0, 1, 0.123456789012345);
  g.add_edge(2, 0, 1.0 / 3.0);
  g.set_params(0, NodeParams{0.01, 1.0 / 14.0});
  g.set_params(1, NodeParams{0.1, 1.0 / 14.0});
  g.set_tag(0, "adult");
  g.set_tag(1, "elderly");

  const std::string text = g.to_text();
  const PropagationGraph g2 = PropagationGraph::from_text(text);
  CHECK(g2.to_text() == text);
  CHECK(g2.node_count() == 3);
  CHECK(g2.mode() == Mode::Pandemic);
  CHECK(g2.params(1).death_prob == 0.1);
  CHECK(g2.tag(1) == "elderly");
  CHECK(g2.in_edges(2).size() == 1);
  CHECK(g2.in_edges(2)[0].rate == 1.0 / 3.0);

  CHECK_THROWS_AS(PropagationGraph::from_text("garbage"), DecodeError);
}

TEST_CASE("property fuzz: conservation, monotone absorption, no spontaneous infection") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::int32_t n = 2 + static_cast<std::int32_t>(rng.uniform_int(18));
    const bool wildfire = rng.bernoulli(0.5);
    PropagationGraph g(wildfire ? Mode::Wildfire : Mode::Pandemic, n);
    for (std::int32_t a = 0; a < n; ++a) {
      for (std::int32_t b = 0; b < n; ++b) {
        if (a != b && rng.bernoulli(0.15)) {
          bool dup = false;
          for (const Edge& e : g.in_edges(a)) dup |= e.source == b;
          if (!dup) g.add_edge(a, b, 0.1 * rng.uniform01());
        }
      }
    }
    for (std::int32_t p = 0; p < n; ++p) {
      const double d = 0.3 * rng.uniform01();
      const double r = wildfire ? 0.0 : 0.3 * rng.uniform01();
      g.set_params(p, NodeParams{d, r});
    }
    SystemState s = make_all_susceptible(n);
    bool any_infected = false;
    for (std::int32_t p = 0; p < n; ++p) {
      const double u = rng.uniform01();
      if (u < 0.3) {
        s.codes[static_cast<std::size_t>(p)] = NodeState::Infected;
        any_infected = true;
      } else if (u < 0.4) {
        s.codes[static_cast<std::size_t>(p)] = NodeState::Dead;
      }
    }
    const EpochConfig cfg{0.5, 0};
    auto prev_hist = count_by_state(s);
    for (int t = 0; t < 25; ++t) {
      s = step_epoch(g, s, {}, cfg, TrajectoryCtx{fold(777, trial)});
      const auto hist = count_by_state(s);
      std::int64_t total = 0;
      for (auto c : hist) total += c;
      REQUIRE(total == n);                     // conservation
      REQUIRE(hist[2] >= prev_hist[2]);        // dead/burnt monotone
      REQUIRE(hist[3] >= prev_hist[3]);        // vaccinated/extinguished monotone
      REQUIRE(hist[4] >= prev_hist[4]);        // recovered monotone
      if (!any_infected) REQUIRE(hist[1] == 0);  // no spontaneous infection
      prev_hist = hist;
    }
  }
}

TEST_SUITE_END();
