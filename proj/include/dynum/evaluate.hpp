#pragma once

#include <cstdint>
#include <vector>

#include "dynum/policy.hpp"
#include "dynum/scenario.hpp"

namespace dynum {

struct FEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n = 0;
};

struct EvaluateOptions {
  int horizon = 10;        // epochs simulated per replica
  double gamma = 0.99;
  int n_replicas = 100;
  int workers = 0;         // 0 = hardware concurrency
};

/// Unbiased Monte Carlo estimate of the discounted utility
/// F(y) = E[ sum_{t<T} gamma^t * u_t ] under `policy` with per-epoch budget y.
/// Replica r draws all randomness from fold(eval_key, Replica, r); results are
/// reduced in replica order, so the estimate is independent of thread count.
/// When `start` is non-null every replica branches from that ground state
/// instead of a freshly sampled initial state.
FEstimate evaluate_F(const Scenario& scenario, const Policy& policy, int budget,
                     const EvaluateOptions& opts, std::uint64_t eval_key,
                     const SimState* start = nullptr);

/// Per-replica totals in replica order (for paired statistical tests).
std::vector<double> evaluate_F_samples(const Scenario& scenario, const Policy& policy, int budget,
                                       const EvaluateOptions& opts, std::uint64_t eval_key,
                                       const SimState* start = nullptr);

FEstimate summarize(const std::vector<double>& samples);

}  // namespace dynum
