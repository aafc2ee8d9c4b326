#include "dynum/evaluate.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "dynum/errors.hpp"

namespace dynum {

namespace {

double run_replica(const Scenario& scenario, const Policy& policy, int budget,
                   const EvaluateOptions& opts, std::uint64_t replica_key, const SimState* start) {
  SimState s = start ? *start : scenario.initial_state(replica_key);
  scenario.set_budget(s, budget);
  const std::uint64_t traj_key = fold(replica_key, StreamTag::NodeStep);
  double total = 0.0;
  double discount = 1.0;
  for (int t = 0; t < opts.horizon; ++t) {
    const Action a = policy.decide(
        scenario, s, budget,
        Rng(fold_seq(replica_key, {static_cast<std::uint64_t>(StreamTag::PolicyDecision),
                                   static_cast<std::uint64_t>(t)})));
    total += discount * scenario.step(s, a, budget, traj_key).utility;
    discount *= opts.gamma;
  }
  return total;
}

}  // namespace

std::vector<double> evaluate_F_samples(const Scenario& scenario, const Policy& policy, int budget,
                                       const EvaluateOptions& opts, std::uint64_t eval_key,
                                       const SimState* start) {
  if (budget < 0) throw ConfigError("budget must be >= 0");
  if (opts.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (opts.n_replicas < 1) throw ConfigError("n_replicas must be >= 1");

  std::vector<double> samples(static_cast<std::size_t>(opts.n_replicas));
  int workers = opts.workers > 0 ? opts.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, opts.n_replicas));

  auto body = [&](int r) {
    const std::uint64_t replica_key =
        fold_seq(eval_key, {static_cast<std::uint64_t>(StreamTag::Replica),
                            static_cast<std::uint64_t>(r)});
    samples[static_cast<std::size_t>(r)] =
        run_replica(scenario, policy, budget, opts, replica_key, start);
  };

  if (workers == 1) {
    for (int r = 0; r < opts.n_replicas; ++r) body(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < opts.n_replicas; r = next.fetch_add(1)) body(r);
      });
    }
    for (auto& th : pool) th.join();
  }
  return samples;
}

FEstimate summarize(const std::vector<double>& samples) {
  FEstimate est;
  est.n = static_cast<int>(samples.size());
  if (est.n == 0) return est;
  double sum = 0.0;
  for (double v : samples) sum += v;
  est.mean = sum / est.n;
  if (est.n > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / (est.n - 1)) / std::sqrt(static_cast<double>(est.n));
  }
  return est;
}

FEstimate evaluate_F(const Scenario& scenario, const Policy& policy, int budget,
                     const EvaluateOptions& opts, std::uint64_t eval_key, const SimState* start) {
  return summarize(evaluate_F_samples(scenario, policy, budget, opts, eval_key, start));
}

}  // namespace dynum
