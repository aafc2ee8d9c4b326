#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynum/contagion.hpp"
#include "dynum/rng.hpp"

namespace dynum::pandemic {

enum class AgeGroup : std::uint8_t { Teen = 0, Adult = 1, Elderly = 2 };

const char* age_group_name(AgeGroup g);

/// Per-unit-time death probabilities while infected; defaults keep the
/// 1 : 10 : 100 teen/adult/elderly ratio.
struct MortalityRates {
  double teen = 0.001;
  double adult = 0.01;
  double elderly = 0.1;

  double of(AgeGroup g) const {
    switch (g) {
      case AgeGroup::Teen: return teen;
      case AgeGroup::Adult: return adult;
      default: return elderly;
    }
  }
};

struct DemographicSpec {
  int n_teen = 0;
  int n_adult = 0;
  int n_elderly = 0;

  /// Erdos-Renyi link probability over adults+elderly. If negative, it is
  /// calibrated by bisection so the elderly average degree hits target_ead.
  double er_edge_prob = -1.0;
  double target_ead = -1.0;
  double degree_tolerance = 0.5;

  double contact_rate = 0.02;   // uniform w on every edge, per unit time
  double recovery_mean = 14.0;  // mean time infected -> recovered; r = 1/mean
  MortalityRates mortality;

  int total() const { return n_teen + n_adult + n_elderly; }
};

/// Generated social graph: contagion graph plus the node -> age group map.
/// Node ids are laid out teens first, then adults, then elderly.
struct SocialGraph {
  sim::PropagationGraph graph;
  std::vector<AgeGroup> groups;
  double er_prob_used = 0.0;
};

/// Builds the age-stratified contact graph: teen/adult families, a teen
/// clique (school), Erdos-Renyi links over adults+elderly, and minimal
/// bridging edges to enforce connectivity. Deterministic per seed.
SocialGraph generate_social_graph(const DemographicSpec& spec, std::uint64_t seed);

/// Bisection on the ER probability until the mean elderly degree (averaged
/// over a few seeds) is within spec.degree_tolerance of target_ead.
double calibrate_er_prob(const DemographicSpec& spec, double target_ead, std::uint64_t seed);

bool is_connected(const sim::PropagationGraph& g);
double elderly_avg_degree(const SocialGraph& sg);
double avg_degree_excl_teens(const SocialGraph& sg);

/// Utility of one epoch transition: negative count of new deaths.
/// Throws ContractViolation on mismatched node counts.
double pandemic_utility(const sim::SystemState& prev, const sim::SystemState& next);

/// Feasible vaccination targets: exactly the susceptible node ids, ascending.
std::vector<std::int32_t> mask_actions(const sim::SystemState& state);

}  // namespace dynum::pandemic
