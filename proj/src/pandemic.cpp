#include "dynum/pandemic.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "dynum/errors.hpp"

namespace dynum::pandemic {

const char* age_group_name(AgeGroup g) {
  switch (g) {
    case AgeGroup::Teen: return "teen";
    case AgeGroup::Adult: return "adult";
    default: return "elderly";
  }
}

namespace {

struct UnionFind {
  std::vector<std::int32_t> parent;
  explicit UnionFind(std::int32_t n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::int32_t find(std::int32_t x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(b)] = a;
    return true;
  }
};

SocialGraph generate_with_prob(const DemographicSpec& spec, double er_prob, std::uint64_t seed) {
  const std::int32_t n = spec.total();
  if (n < 1) throw ConfigError("demographic spec must contain at least one node");
  if (!(er_prob >= 0.0 && er_prob <= 1.0)) throw ConfigError("er_edge_prob outside [0,1]");
  if (!(spec.recovery_mean > 0.0)) throw ConfigError("recovery_mean must be positive");

  SocialGraph sg;
  sg.er_prob_used = er_prob;
  sg.graph = sim::PropagationGraph(sim::Mode::Pandemic, n);
  sg.groups.reserve(static_cast<std::size_t>(n));
  const double r = 1.0 / spec.recovery_mean;
  for (std::int32_t p = 0; p < n; ++p) {
    AgeGroup g = p < spec.n_teen                 ? AgeGroup::Teen
                 : p < spec.n_teen + spec.n_adult ? AgeGroup::Adult
                                                  : AgeGroup::Elderly;
    sg.groups.push_back(g);
    sg.graph.set_params(p, sim::NodeParams{spec.mortality.of(g), r});
    sg.graph.set_tag(p, age_group_name(g));
  }

  const double w = spec.contact_rate;
  UnionFind uf(n);
  Rng rng(fold(fold(seed, StreamTag::GraphGen), 0));
  std::unordered_set<std::uint64_t> edge_set;
  auto pair_key = [n](std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(b);
  };

  // Families: 1-2 teens with 2 adults each. Adults are consumed in shuffled
  // order and reused round-robin if there are fewer than 2 per family.
  std::vector<std::int32_t> teens(static_cast<std::size_t>(spec.n_teen));
  std::iota(teens.begin(), teens.end(), 0);
  std::vector<std::int32_t> adults(static_cast<std::size_t>(spec.n_adult));
  std::iota(adults.begin(), adults.end(), spec.n_teen);
  rng.shuffle(teens);
  rng.shuffle(adults);

  auto link = [&](std::int32_t a, std::int32_t b) {
    if (a == b || !edge_set.insert(pair_key(a, b)).second) return;
    sg.graph.add_contact(a, b, w);
    uf.unite(a, b);
  };

  if (spec.n_adult > 0) {
    std::size_t adult_cursor = 0;
    auto next_adult = [&]() {
      const std::int32_t a = adults[adult_cursor % adults.size()];
      ++adult_cursor;
      return a;
    };
    std::size_t i = 0;
    while (i < teens.size()) {
      const std::size_t family_teens = std::min<std::size_t>(1 + rng.uniform_int(2), teens.size() - i);
      const std::int32_t a0 = next_adult();
      const std::int32_t a1 = next_adult();
      if (a0 != a1) link(a0, a1);
      for (std::size_t t = 0; t < family_teens; ++t) {
        link(teens[i + t], a0);
        if (a1 != a0) link(teens[i + t], a1);
      }
      i += family_teens;
    }
  }

  // School: all teens form one clique.
  for (std::int32_t a = 0; a < spec.n_teen; ++a) {
    for (std::int32_t b = a + 1; b < spec.n_teen; ++b) link(a, b);
  }

  // Erdos-Renyi over adults + elderly.
  for (std::int32_t a = spec.n_teen; a < n; ++a) {
    for (std::int32_t b = a + 1; b < n; ++b) {
      if (rng.bernoulli(er_prob)) link(a, b);
    }
  }

  // Connectivity: one bridging edge per residual component, toward the
  // component of node 0.
  std::vector<std::vector<std::int32_t>> components;
  {
    std::vector<std::int32_t> root_index(static_cast<std::size_t>(n), -1);
    for (std::int32_t p = 0; p < n; ++p) {
      const std::int32_t root = uf.find(p);
      if (root_index[static_cast<std::size_t>(root)] < 0) {
        root_index[static_cast<std::size_t>(root)] = static_cast<std::int32_t>(components.size());
        components.emplace_back();
      }
      components[static_cast<std::size_t>(root_index[static_cast<std::size_t>(root)])].push_back(p);
    }
  }
  for (std::size_t c = 1; c < components.size(); ++c) {
    const std::int32_t a = components[0][rng.uniform_int(components[0].size())];
    const std::int32_t b = components[c][rng.uniform_int(components[c].size())];
    link(a, b);
  }
  return sg;
}

}  // namespace

bool is_connected(const sim::PropagationGraph& g) {
  const std::int32_t n = g.node_count();
  if (n <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::int32_t> stack{0};
  seen[0] = 1;
  std::int32_t visited = 1;
  while (!stack.empty()) {
    const std::int32_t p = stack.back();
    stack.pop_back();
    for (const sim::Edge& e : g.in_edges(p)) {
      if (!seen[static_cast<std::size_t>(e.source)]) {
        seen[static_cast<std::size_t>(e.source)] = 1;
        ++visited;
        stack.push_back(e.source);
      }
    }
  }
  return visited == n;
}

double elderly_avg_degree(const SocialGraph& sg) {
  std::int64_t deg = 0;
  std::int64_t count = 0;
  for (std::int32_t p = 0; p < sg.graph.node_count(); ++p) {
    if (sg.groups[static_cast<std::size_t>(p)] != AgeGroup::Elderly) continue;
    deg += static_cast<std::int64_t>(sg.graph.in_edges(p).size());
    ++count;
  }
  return count == 0 ? 0.0 : static_cast<double>(deg) / static_cast<double>(count);
}

double avg_degree_excl_teens(const SocialGraph& sg) {
  std::int64_t deg = 0;
  std::int64_t count = 0;
  for (std::int32_t p = 0; p < sg.graph.node_count(); ++p) {
    if (sg.groups[static_cast<std::size_t>(p)] == AgeGroup::Teen) continue;
    deg += static_cast<std::int64_t>(sg.graph.in_edges(p).size());
    ++count;
  }
  return count == 0 ? 0.0 : static_cast<double>(deg) / static_cast<double>(count);
}

double calibrate_er_prob(const DemographicSpec& spec, double target_ead, std::uint64_t seed) {
  if (spec.n_elderly <= 0) throw ConfigError("calibration needs elderly nodes");
  const int pool = spec.n_adult + spec.n_elderly - 1;
  if (pool <= 0) throw ConfigError("calibration needs an ER pool");
  if (target_ead > pool + 1) throw ConfigError("target elderly degree unreachable");

  const std::uint64_t cal_seed = fold(seed, StreamTag::Calibration);
  const int probes = 8;
  auto mean_ead = [&](double q) {
    double acc = 0.0;
    for (int i = 0; i < probes; ++i) {
      acc += elderly_avg_degree(generate_with_prob(spec, q, fold(cal_seed, static_cast<std::uint64_t>(i))));
    }
    return acc / probes;
  };

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double got = mean_ead(mid);
    if (std::abs(got - target_ead) <= spec.degree_tolerance * 0.5) return mid;
    (got < target_ead ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SocialGraph generate_social_graph(const DemographicSpec& spec, std::uint64_t seed) {
  double q = spec.er_edge_prob;
  if (q < 0.0) {
    if (spec.target_ead < 0.0) throw ConfigError("need er_edge_prob or target_ead");
    q = calibrate_er_prob(spec, spec.target_ead, seed);
  }
  return generate_with_prob(spec, q, seed);
}

double pandemic_utility(const sim::SystemState& prev, const sim::SystemState& next) {
  if (prev.codes.size() != next.codes.size()) {
    throw ContractViolation("pandemic_utility: mismatched node counts");
  }
  const auto before = sim::count_by_state(prev);
  const auto after = sim::count_by_state(next);
  const auto dead = static_cast<std::size_t>(sim::NodeState::Dead);
  return -static_cast<double>(after[dead] - before[dead]);
}

std::vector<std::int32_t> mask_actions(const sim::SystemState& state) {
  std::vector<std::int32_t> ids;
  for (std::size_t p = 0; p < state.codes.size(); ++p) {
    if (state.codes[p] == sim::NodeState::Susceptible) ids.push_back(static_cast<std::int32_t>(p));
  }
  return ids;
}

}  // namespace dynum::pandemic
