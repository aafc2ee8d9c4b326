#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dynum/rng.hpp"

namespace dynum::sim {

enum class Mode : std::uint8_t { Pandemic, Wildfire };

/// Per-node status code shared by both propagation modes.
/// Pandemic reading: susceptible / infected / dead / vaccinated / recovered.
/// Wildfire reading: vulnerable / burning / burnt / extinguished (Recovered unused).
/// Dead, Vaccinated and Recovered are absorbing.
enum class NodeState : std::uint8_t {
  Susceptible = 0,
  Infected = 1,
  Dead = 2,
  Vaccinated = 3,
  Recovered = 4,
};

constexpr int kNumStates = 5;

/// Per-unit-time transition rates of one node while infected.
/// death_prob + recovery_prob <= 1; wildfire graphs use recovery_prob == 0.
struct NodeParams {
  double death_prob = 0.0;
  double recovery_prob = 0.0;
};

/// Directed contagion edge: `source` ignites/infects the owning node at rate `rate`
/// (probability per unit time; the per-sub-interval contact probability is rate*dt).
struct Edge {
  std::int32_t source = 0;
  double rate = 0.0;
};

/// Weighted contact structure plus per-node parameters. Immutable once built
/// (construction helpers only add; there is no mutation during stepping).
class PropagationGraph {
 public:
  PropagationGraph() = default;
  PropagationGraph(Mode mode, std::int32_t node_count);

  Mode mode() const { return mode_; }
  std::int32_t node_count() const { return static_cast<std::int32_t>(in_edges_.size()); }

  /// Adds the directed edge (victim <- source) with contact rate w in [0,1].
  void add_edge(std::int32_t victim, std::int32_t source, double rate);
  /// Adds both directions with the same rate.
  void add_contact(std::int32_t a, std::int32_t b, double rate);

  void set_params(std::int32_t node, NodeParams params);
  const NodeParams& params(std::int32_t node) const { return params_[static_cast<std::size_t>(node)]; }

  const std::vector<Edge>& in_edges(std::int32_t node) const {
    return in_edges_[static_cast<std::size_t>(node)];
  }

  /// Optional per-node label (age group, ...). Empty by default.
  void set_tag(std::int32_t node, std::string tag);
  const std::string& tag(std::int32_t node) const { return tags_[static_cast<std::size_t>(node)]; }

  std::int64_t edge_count() const { return edge_count_; }
  double max_rate_sum() const { return max_rate_sum_; }

  /// Checks the structural invariants for a given sub-interval length:
  /// sum_k w_{p,k}*dt <= 1 per node, d+r <= 1, no duplicate edges, and
  /// recovery == 0 in wildfire mode. Throws ConfigError on violation.
  void validate(double dt) const;

  /// Documented text serialization; see docs/formats.md. Round-trip exact.
  std::string to_text() const;
  static PropagationGraph from_text(std::string_view text);

 private:
  Mode mode_ = Mode::Pandemic;
  std::vector<std::vector<Edge>> in_edges_;
  std::vector<NodeParams> params_;
  std::vector<std::string> tags_;
  std::vector<double> rate_sum_;
  double max_rate_sum_ = 0.0;
  std::int64_t edge_count_ = 0;
};

/// Sub-interval discretization of one decision epoch: 1/dt sub-intervals are
/// executed per epoch, exactly.
struct EpochConfig {
  double dt = 1.0;
  std::uint64_t rng_seed = 0;

  /// 1/dt as an integer; throws ConfigError if 1/dt is not a positive integer.
  int substeps() const;
};

struct SystemState {
  std::vector<NodeState> codes;
  std::int64_t epoch = 0;

  bool operator==(const SystemState&) const = default;
};

SystemState make_all_susceptible(std::int32_t node_count);

/// Per-node binary action vector a_{p,t}; empty means "no actions".
using ActionMask = std::vector<std::uint8_t>;

/// Key material for one trajectory (one replica). Node draws for sub-interval i
/// of epoch t come from the stream fold(key, NodeStep, node, t, i), so replicas,
/// nodes and epochs are independent and replayable in isolation.
struct TrajectoryCtx {
  std::uint64_t key = 0;

  Rng node_stream(std::int32_t node, std::int64_t epoch, int sub_index) const {
    return Rng(fold_seq(fold(key, StreamTag::NodeStep),
                        {static_cast<std::uint64_t>(node), static_cast<std::uint64_t>(epoch),
                         static_cast<std::uint64_t>(sub_index)}));
  }
};

/// Advances one sub-interval (synchronous update from the incoming state).
/// Actions are legal only at sub_index 0: pandemic vaccinates susceptible
/// targets, wildfire extinguishes burning ones; the action is applied before
/// contact realization within the sub-interval. Throws RejectedAction for
/// illegal targets and ContractViolation for actions at sub_index > 0.
SystemState step_subinterval(const PropagationGraph& graph, const SystemState& state,
                             const ActionMask& actions, int sub_index, double dt,
                             TrajectoryCtx ctx);

/// Runs all 1/dt sub-intervals of one epoch and increments the epoch counter.
SystemState step_epoch(const PropagationGraph& graph, const SystemState& state,
                       const ActionMask& actions, const EpochConfig& config, TrajectoryCtx ctx);

/// In-place epoch step using caller-provided scratch to avoid reallocation in
/// hot loops. `scratch` may be empty; it is resized as needed.
void step_epoch_inplace(const PropagationGraph& graph, SystemState& state,
                        const ActionMask& actions, const EpochConfig& config, TrajectoryCtx ctx,
                        std::vector<NodeState>& scratch);

/// Exact counts per state code; sums to node_count.
std::array<std::int64_t, kNumStates> count_by_state(const SystemState& state);

/// CSV line "epoch,susceptible,infected,dead,vaccinated,recovered".
std::string histogram_csv_row(const SystemState& state);

}  // namespace dynum::sim
