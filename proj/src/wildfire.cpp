#include "dynum/wildfire.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dynum/errors.hpp"

namespace dynum::wildfire {

bool GridSpec::adjacent(std::int32_t a, std::int32_t b) const {
  if (a == b) return false;
  const int dx = std::abs(cell_x(a) - cell_x(b));
  const int dy = std::abs(cell_y(a) - cell_y(b));
  if (neighborhood == 4) return dx + dy == 1;
  return std::max(dx, dy) == 1;
}

void GridSpec::materialize(std::uint64_t seed) {
  validate();
  const auto n = static_cast<std::size_t>(cells());
  if (!veg_type.empty() && !veg_density.empty()) return;
  Rng rng(fold(fold(seed, StreamTag::GraphGen), 1));
  if (veg_type.empty()) {
    veg_type.resize(n);
    for (double& v : veg_type) v = vegc * rng.uniform01();
  }
  if (veg_density.empty()) {
    veg_density.resize(n);
    for (double& v : veg_density) v = vegc * rng.uniform01();
  }
}

void GridSpec::validate() const {
  if (width < 1 || height < 1) throw ConfigError("grid dimensions must be positive");
  if (neighborhood != 4 && neighborhood != 8) throw ConfigError("neighborhood must be 4 or 8");
  if (!(wind_speed >= 0.0 && wind_speed <= 1.0)) throw ConfigError("wind_speed outside [0,1]");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (wind_speed > 0.0) {
    const double norm = std::hypot(wind_dx, wind_dy);
    if (norm < 1e-12) throw ConfigError("wind_speed > 0 requires a wind direction");
  }
  if (!veg_type.empty() && veg_type.size() != static_cast<std::size_t>(cells())) {
    throw ConfigError("veg_type size mismatch");
  }
  if (!veg_density.empty() && veg_density.size() != static_cast<std::size_t>(cells())) {
    throw ConfigError("veg_density size mismatch");
  }
  for (double v : veg_type) {
    if (v < 0.0) throw ConfigError("veg_type factors must be >= 0");
  }
  for (double v : veg_density) {
    if (v < 0.0) throw ConfigError("veg_density factors must be >= 0");
  }
  if (max_step < 0) throw ConfigError("max_step must be >= 0");
}

double wind_factor(const GridSpec& spec, std::int32_t victim, std::int32_t source) {
  const double ws = spec.wind_gain * spec.wind_speed;
  if (ws <= 0.0) return 1.0;
  const double sx = spec.cell_x(victim) - spec.cell_x(source);
  const double sy = spec.cell_y(victim) - spec.cell_y(source);
  const double snorm = std::hypot(sx, sy);
  const double wnorm = std::hypot(spec.wind_dx, spec.wind_dy);
  const double cos_theta = (sx * spec.wind_dx + sy * spec.wind_dy) / (snorm * wnorm);
  return std::exp(ws * (cos_theta - 1.0));
}

double spread_probability(std::int32_t victim, std::int32_t source, const GridSpec& spec) {
  if (!spec.adjacent(victim, source)) {
    throw ContractViolation("spread_probability: cells are not adjacent");
  }
  if (spec.veg_type.empty() || spec.veg_density.empty()) {
    throw ContractViolation("spread_probability: spec not materialized");
  }
  const auto i = static_cast<std::size_t>(victim);
  const double w = spec.kappa * (1.0 + spec.veg_type[i]) * (1.0 + spec.veg_density[i]) *
                   wind_factor(spec, victim, source);
  if (w > 1.0) throw ConfigError("spread probability exceeds 1; reduce kappa");
  return w;
}

sim::PropagationGraph build_graph(const GridSpec& spec) {
  spec.validate();
  if (spec.veg_type.empty() || spec.veg_density.empty()) {
    throw ConfigError("build_graph: spec not materialized");
  }
  sim::PropagationGraph g(sim::Mode::Wildfire, spec.cells());
  for (std::int32_t p = 0; p < spec.cells(); ++p) {
    g.set_params(p, sim::NodeParams{spec.burnout_rate, 0.0});
  }
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const std::int32_t victim = spec.cell_id(x, y);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (spec.neighborhood == 4 && std::abs(dx) + std::abs(dy) != 1) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= spec.width || ny < 0 || ny >= spec.height) continue;
          const std::int32_t source = spec.cell_id(nx, ny);
          g.add_edge(victim, source, spread_probability(victim, source, spec));
        }
      }
    }
  }
  g.validate(spec.dt);
  return g;
}

int chebyshev(const GridSpec& spec, std::int32_t a, std::int32_t b) {
  return std::max(std::abs(spec.cell_x(a) - spec.cell_x(b)),
                  std::abs(spec.cell_y(a) - spec.cell_y(b)));
}

MoveResult move_and_extinguish(const GridSpec& spec, const sim::SystemState& state,
                               const UnitState& units, const std::vector<std::int32_t>& targets) {
  if (targets.size() != units.positions.size()) {
    throw ContractViolation("move_and_extinguish: one target per unit required");
  }
  MoveResult result;
  result.units = units;
  result.actions.assign(state.codes.size(), 0);
  std::unordered_set<std::int32_t> extinguished;
  for (std::size_t u = 0; u < targets.size(); ++u) {
    const std::int32_t t = targets[u];
    if (t < 0 || t >= spec.cells()) throw RejectedAction("unit target outside the grid");
    if (chebyshev(spec, units.positions[u], t) > units.max_step) {
      throw RejectedAction("unit move exceeds max_step");
    }
    result.units.positions[u] = t;
    if (state.codes[static_cast<std::size_t>(t)] == sim::NodeState::Infected &&
        extinguished.insert(t).second) {
      result.actions[static_cast<std::size_t>(t)] = 1;
      ++result.extinguish_count;
    }
  }
  return result;
}

int newly_ignited(const sim::SystemState& prev, const sim::SystemState& next) {
  if (prev.codes.size() != next.codes.size()) {
    throw ContractViolation("newly_ignited: mismatched node counts");
  }
  int count = 0;
  for (std::size_t p = 0; p < prev.codes.size(); ++p) {
    if (prev.codes[p] == sim::NodeState::Susceptible && next.codes[p] == sim::NodeState::Infected) {
      ++count;
    }
  }
  return count;
}

double wildfire_reward(const sim::SystemState& prev, const sim::SystemState& next,
                       int extinguished, double c_e, double c_s) {
  return c_e * extinguished - c_s * newly_ignited(prev, next);
}

}  // namespace dynum::wildfire
