#include "dynum/contagion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "dynum/errors.hpp"
#include "dynum/strings.hpp"

namespace dynum::sim {

namespace {

void check_node(const char* what, std::int32_t node, std::int32_t count) {
  if (node < 0 || node >= count) {
    throw ContractViolation(std::string(what) + ": node id out of range");
  }
}

}  // namespace

PropagationGraph::PropagationGraph(Mode mode, std::int32_t node_count) : mode_(mode) {
  if (node_count < 0) throw ConfigError("negative node count");
  in_edges_.resize(static_cast<std::size_t>(node_count));
  params_.resize(static_cast<std::size_t>(node_count));
  tags_.resize(static_cast<std::size_t>(node_count));
  rate_sum_.assign(static_cast<std::size_t>(node_count), 0.0);
}

void PropagationGraph::add_edge(std::int32_t victim, std::int32_t source, double rate) {
  check_node("add_edge", victim, node_count());
  check_node("add_edge", source, node_count());
  if (victim == source) throw ConfigError("self edge");
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("contact rate outside [0,1]");
  for (const Edge& e : in_edges_[static_cast<std::size_t>(victim)]) {
    if (e.source == source) throw ConfigError("duplicate edge");
  }
  in_edges_[static_cast<std::size_t>(victim)].push_back(Edge{source, rate});
  rate_sum_[static_cast<std::size_t>(victim)] += rate;
  max_rate_sum_ = std::max(max_rate_sum_, rate_sum_[static_cast<std::size_t>(victim)]);
  ++edge_count_;
}

void PropagationGraph::add_contact(std::int32_t a, std::int32_t b, double rate) {
  add_edge(a, b, rate);
  add_edge(b, a, rate);
}

void PropagationGraph::set_params(std::int32_t node, NodeParams params) {
  check_node("set_params", node, node_count());
  if (!(params.death_prob >= 0.0 && params.recovery_prob >= 0.0 &&
        params.death_prob + params.recovery_prob <= 1.0 + 1e-12)) {
    throw ConfigError("node params must satisfy d >= 0, r >= 0, d + r <= 1");
  }
  if (mode_ == Mode::Wildfire && params.recovery_prob != 0.0) {
    throw ConfigError("wildfire graphs have no recovery transition");
  }
  params_[static_cast<std::size_t>(node)] = params;
}

void PropagationGraph::set_tag(std::int32_t node, std::string tag) {
  check_node("set_tag", node, node_count());
  tags_[static_cast<std::size_t>(node)] = std::move(tag);
}

void PropagationGraph::validate(double dt) const {
  if (!(dt > 0.0 && dt <= 1.0)) throw ConfigError("dt must be in (0, 1]");
  for (std::int32_t p = 0; p < node_count(); ++p) {
    if (rate_sum_[static_cast<std::size_t>(p)] * dt > 1.0 + 1e-12) {
      throw ConfigError("rate-sum invariant violated: sum_k w*dt > 1 at node " +
                        std::to_string(p));
    }
  }
}

std::string PropagationGraph::to_text() const {
  std::ostringstream out;
  out << "dynum-graph v1\n";
  out << "mode " << (mode_ == Mode::Pandemic ? "pandemic" : "wildfire") << "\n";
  out << "nodes " << node_count() << "\n";
  for (std::int32_t p = 0; p < node_count(); ++p) {
    const NodeParams& np = params_[static_cast<std::size_t>(p)];
    out << "node " << p << " d=" << fmt_double(np.death_prob) << " r=" << fmt_double(np.recovery_prob);
    if (!tags_[static_cast<std::size_t>(p)].empty()) out << " tag=" << tags_[static_cast<std::size_t>(p)];
    out << "\n";
  }
  for (std::int32_t p = 0; p < node_count(); ++p) {
    for (const Edge& e : in_edges_[static_cast<std::size_t>(p)]) {
      out << "edge " << p << " " << e.source << " " << fmt_double(e.rate) << "\n";
    }
  }
  return out.str();
}

PropagationGraph PropagationGraph::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [&](const std::string& why) -> DecodeError {
    return DecodeError("graph parse error: " + why, 0);
  };
  if (!std::getline(in, line) || line != "dynum-graph v1") throw fail("bad header");
  std::string word, mode_str;
  if (!(in >> word >> mode_str) || word != "mode") throw fail("missing mode");
  Mode mode;
  if (mode_str == "pandemic") {
    mode = Mode::Pandemic;
  } else if (mode_str == "wildfire") {
    mode = Mode::Wildfire;
  } else {
    throw fail("unknown mode " + mode_str);
  }
  std::int32_t n = 0;
  if (!(in >> word >> n) || word != "nodes") throw fail("missing node count");
  PropagationGraph g(mode, n);
  while (in >> word) {
    if (word == "node") {
      std::int32_t id = 0;
      if (!(in >> id)) throw fail("bad node record");
      NodeParams np;
      std::string rest;
      std::getline(in, rest);
      std::istringstream attrs(rest);
      std::string kv;
      while (attrs >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw fail("bad node attribute " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "d") {
          np.death_prob = std::stod(val);
        } else if (key == "r") {
          np.recovery_prob = std::stod(val);
        } else if (key == "tag") {
          g.set_tag(id, val);
        } else {
          throw fail("unknown node attribute " + key);
        }
      }
      g.set_params(id, np);
    } else if (word == "edge") {
      std::int32_t victim = 0, source = 0;
      double rate = 0.0;
      if (!(in >> victim >> source >> rate)) throw fail("bad edge record");
      g.add_edge(victim, source, rate);
    } else {
      throw fail("unknown record " + word);
    }
  }
  return g;
}

int EpochConfig::substeps() const {
  if (!(dt > 0.0 && dt <= 1.0)) throw ConfigError("dt must be in (0, 1]");
  const double inv = 1.0 / dt;
  const int n = static_cast<int>(std::lround(inv));
  if (n < 1 || std::fabs(inv - n) > 1e-9) {
    throw ConfigError("1/dt must be a positive integer");
  }
  return n;
}

SystemState make_all_susceptible(std::int32_t node_count) {
  SystemState s;
  s.codes.assign(static_cast<std::size_t>(node_count), NodeState::Susceptible);
  return s;
}

namespace {

void validate_actions(const PropagationGraph& graph, const SystemState& state,
                      const ActionMask& actions, int sub_index) {
  if (actions.empty()) return;
  if (static_cast<std::int32_t>(actions.size()) != graph.node_count()) {
    throw ContractViolation("action mask size must equal node count");
  }
  bool any = false;
  for (std::size_t p = 0; p < actions.size(); ++p) {
    if (!actions[p]) continue;
    any = true;
    const NodeState s = state.codes[p];
    if (graph.mode() == Mode::Pandemic && s != NodeState::Susceptible) {
      throw RejectedAction("vaccinating a non-susceptible node " + std::to_string(p));
    }
    if (graph.mode() == Mode::Wildfire && s != NodeState::Infected) {
      throw RejectedAction("extinguishing a non-burning cell " + std::to_string(p));
    }
  }
  if (any && sub_index != 0) {
    throw ContractViolation("actions are applicable only at sub-interval 0");
  }
}

// Core synchronous update; writes into `out` (must be sized node_count).
void step_into(const PropagationGraph& graph, const SystemState& state, const ActionMask& actions,
               int sub_index, double dt, TrajectoryCtx ctx, std::vector<NodeState>& out) {
  const std::int32_t n = graph.node_count();
  if (static_cast<std::int32_t>(state.codes.size()) != n) {
    throw ContractViolation("state size must equal node count");
  }
  validate_actions(graph, state, actions, sub_index);
  const bool apply_actions = sub_index == 0 && !actions.empty();

  for (std::int32_t p = 0; p < n; ++p) {
    const NodeState s = state.codes[static_cast<std::size_t>(p)];
    NodeState next = s;
    switch (s) {
      case NodeState::Susceptible: {
        if (apply_actions && graph.mode() == Mode::Pandemic && actions[static_cast<std::size_t>(p)]) {
          next = NodeState::Vaccinated;
          break;
        }
        // At most one contact per directed edge per sub-interval.
        const auto& edges = graph.in_edges(p);
        if (!edges.empty()) {
          Rng rng;
          bool rng_ready = false;
          for (const Edge& e : edges) {
            if (state.codes[static_cast<std::size_t>(e.source)] != NodeState::Infected) continue;
            if (!rng_ready) {
              rng = ctx.node_stream(p, state.epoch, sub_index);
              rng_ready = true;
            }
            if (rng.bernoulli(e.rate * dt)) {
              next = NodeState::Infected;
              break;
            }
          }
        }
        break;
      }
      case NodeState::Infected: {
        if (apply_actions && graph.mode() == Mode::Wildfire && actions[static_cast<std::size_t>(p)]) {
          next = NodeState::Vaccinated;  // extinguished
          break;
        }
        const NodeParams& np = graph.params(p);
        if (np.death_prob > 0.0 || np.recovery_prob > 0.0) {
          Rng rng = ctx.node_stream(p, state.epoch, sub_index);
          // One categorical draw: die w.p. d*dt, recover w.p. r*dt, else stay infected.
          const double u = rng.uniform01();
          if (u < np.death_prob * dt) {
            next = NodeState::Dead;
          } else if (graph.mode() == Mode::Pandemic && u < (np.death_prob + np.recovery_prob) * dt) {
            next = NodeState::Recovered;
          }
        }
        break;
      }
      default:
        break;  // Dead, Vaccinated, Recovered are absorbing.
    }
    out[static_cast<std::size_t>(p)] = next;
  }
}

}  // namespace

SystemState step_subinterval(const PropagationGraph& graph, const SystemState& state,
                             const ActionMask& actions, int sub_index, double dt,
                             TrajectoryCtx ctx) {
  graph.validate(dt);
  SystemState next = state;
  step_into(graph, state, actions, sub_index, dt, ctx, next.codes);
  return next;
}

void step_epoch_inplace(const PropagationGraph& graph, SystemState& state,
                        const ActionMask& actions, const EpochConfig& config, TrajectoryCtx ctx,
                        std::vector<NodeState>& scratch) {
  const int substeps = config.substeps();
  graph.validate(config.dt);
  scratch.resize(state.codes.size());
  static const ActionMask kNoActions;
  for (int i = 0; i < substeps; ++i) {
    step_into(graph, state, i == 0 ? actions : kNoActions, i, config.dt, ctx, scratch);
    state.codes.swap(scratch);
  }
  ++state.epoch;
}

SystemState step_epoch(const PropagationGraph& graph, const SystemState& state,
                       const ActionMask& actions, const EpochConfig& config, TrajectoryCtx ctx) {
  SystemState next = state;
  std::vector<NodeState> scratch;
  step_epoch_inplace(graph, next, actions, config, ctx, scratch);
  return next;
}

std::array<std::int64_t, kNumStates> count_by_state(const SystemState& state) {
  std::array<std::int64_t, kNumStates> hist{};
  for (NodeState s : state.codes) hist[static_cast<std::size_t>(s)] += 1;
  return hist;
}

std::string histogram_csv_row(const SystemState& state) {
  const auto h = count_by_state(state);
  std::ostringstream out;
  out << state.epoch;
  for (std::int64_t c : h) out << "," << c;
  return out.str();
}

}  // namespace dynum::sim
