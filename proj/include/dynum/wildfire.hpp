#pragma once

#include <cstdint>
#include <vector>

#include "dynum/contagion.hpp"
#include "dynum/rng.hpp"

namespace dynum::wildfire {

/// Grid scenario description. Cell ids are row-major: id = y*width + x.
/// Per-cell vegetation factors can be given explicitly or generated from
/// `vegc` (each factor uniform in [0, vegc]) with materialize().
struct GridSpec {
  int width = 16;
  int height = 16;
  int neighborhood = 8;  // 4 or 8
  double wind_dx = 0.0;  // unit vector; (0,0) means no wind
  double wind_dy = 0.0;
  double wind_speed = 0.0;  // [0,1], fraction of the typical maximum
  double wind_gain = 3.0;   // exponent scale: phi = exp(gain*speed*(cos(theta)-1))
  double kappa = 0.1;       // normalization; max edge probability 0.4 at unit factors
  double vegc = 1.0;        // average vegetation coefficient used by materialize()
  std::vector<double> veg_type;     // v_p >= 0, size width*height when set
  std::vector<double> veg_density;  // dens_p >= 0
  double burnout_rate = 0.1;        // per-unit-time probability a burning cell burns out
  double dt = 0.25;
  int max_step = 1;  // Chebyshev movement radius per epoch
  double extinguish_reward = 1.0;
  double spread_penalty = 1.0;

  int cells() const { return width * height; }
  int cell_x(std::int32_t id) const { return id % width; }
  int cell_y(std::int32_t id) const { return id / width; }
  std::int32_t cell_id(int x, int y) const { return y * width + x; }
  bool adjacent(std::int32_t a, std::int32_t b) const;

  /// Fills veg_type/veg_density from the seed if they are empty.
  void materialize(std::uint64_t seed);
  void validate() const;
};

/// Wind alignment factor for fire travelling source -> victim:
/// phi = exp(ws*(cos(theta)-1)) with ws = wind_gain*wind_speed and theta the
/// angle between the wind vector and the spread direction. phi = 1 without wind.
double wind_factor(const GridSpec& spec, std::int32_t victim, std::int32_t source);

/// Ignition probability per unit time for the directed edge source -> victim:
/// w = kappa * (1 + v_victim) * (1 + dens_victim) * phi. Requires adjacency.
double spread_probability(std::int32_t victim, std::int32_t source, const GridSpec& spec);

/// Builds the full grid contagion graph from a materialized spec.
sim::PropagationGraph build_graph(const GridSpec& spec);

/// Firefighting units: one cell per unit, bounded per-epoch displacement.
struct UnitState {
  std::vector<std::int32_t> positions;
  int max_step = 1;
};

struct MoveResult {
  UnitState units;
  sim::ActionMask actions;  // extinguish actions emitted this epoch
  int extinguish_count = 0;
};

/// Moves every unit to its target (must be within max_step in Chebyshev
/// distance) and emits one extinguish action per distinct burning cell that
/// now hosts a unit. Throws RejectedAction on out-of-range moves.
MoveResult move_and_extinguish(const GridSpec& spec, const sim::SystemState& state,
                               const UnitState& units, const std::vector<std::int32_t>& targets);

/// Multi-objective epoch reward: c_e*extinguished - c_s*(cells newly ignited).
double wildfire_reward(const sim::SystemState& prev, const sim::SystemState& next,
                       int extinguished, double c_e, double c_s);

/// Number of cells that changed Susceptible -> Infected across one epoch.
int newly_ignited(const sim::SystemState& prev, const sim::SystemState& next);

int chebyshev(const GridSpec& spec, std::int32_t a, std::int32_t b);

}  // namespace dynum::wildfire
