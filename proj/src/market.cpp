#include "dynum/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynum/errors.hpp"

namespace dynum::market {

double primal_response_scalar(const fit::PwlUtility& model, double lambda, double cap) {
  if (lambda < 0.0) throw ContractViolation("primal_response: negative price");
  if (cap < 0.0) throw ConfigError("primal_response: negative cap");
  if (model.empty() || model.dim() != 1) {
    return 0.0;  // empty surrogate: no utility, demand nothing
  }
  // Candidate maximizers: bounds, anchor points, and pairwise intersections
  // of the supporting lines (the breakpoints of the min envelope).
  std::vector<double> candidates{0.0, cap};
  const auto& anchors = model.anchors();
  for (const auto& a : anchors) {
    if (a.y[0] >= 0.0 && a.y[0] <= cap) candidates.push_back(a.y[0]);
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      const double gi = anchors[i].g[0], gj = anchors[j].g[0];
      if (std::fabs(gi - gj) < 1e-15) continue;
      // u_i + g_i (x - y_i) = u_j + g_j (x - y_j)
      const double x = (anchors[j].u_hat - anchors[i].u_hat + gi * anchors[i].y[0] -
                        gj * anchors[j].y[0]) /
                       (gi - gj);
      if (x >= 0.0 && x <= cap) candidates.push_back(x);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  double best_y = 0.0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (double y : candidates) {
    const double v = model.evaluate(y) - lambda * y;
    if (v > best_v + 1e-12) {  // strict improvement: smallest maximizer wins ties
      best_v = v;
      best_y = y;
    }
  }
  return best_y;
}

Vec primal_response_vector(const fit::PwlUtility& model, const Vec& lambda, const Vec& cap,
                           double tol, int max_iters) {
  const int d = model.dim();
  if (static_cast<int>(lambda.size()) != d || static_cast<int>(cap.size()) != d) {
    throw ContractViolation("primal_response_vector: dimension mismatch");
  }
  Vec y(static_cast<std::size_t>(d), 0.0);
  if (model.empty()) return y;
  const auto& anchors = model.anchors();

  auto active_gradient = [&](const Vec& point) {
    double best = std::numeric_limits<double>::infinity();
    const fit::Anchor* arg = &anchors.front();
    for (const auto& a : anchors) {
      double v = a.u_hat;
      for (int k = 0; k < d; ++k) v += a.g[static_cast<std::size_t>(k)] * (point[static_cast<std::size_t>(k)] - a.y[static_cast<std::size_t>(k)]);
      if (v < best) {
        best = v;
        arg = &a;
      }
    }
    return arg;
  };

  double step0 = 1.0;
  for (const auto& a : anchors) {
    for (double g : a.g) step0 = std::max(step0, g);
  }
  step0 = 1.0 / step0;

  auto objective = [&](const Vec& point) {
    double v = model.evaluate(std::span<const double>(point.data(), point.size()));
    for (int k = 0; k < d; ++k) v -= lambda[static_cast<std::size_t>(k)] * point[static_cast<std::size_t>(k)];
    return v;
  };

  // Projected supergradient ascent with diminishing steps; the best iterate
  // seen is returned (the raw iterate may orbit a kink).
  Vec best = y;
  double best_value = objective(y);
  for (int it = 1; it <= max_iters; ++it) {
    const fit::Anchor* a = active_gradient(y);
    const double step = step0 / std::sqrt(static_cast<double>(it));
    double movement = 0.0;
    for (int k = 0; k < d; ++k) {
      const double grad = a->g[static_cast<std::size_t>(k)] - lambda[static_cast<std::size_t>(k)];
      double next = y[static_cast<std::size_t>(k)] + step * grad;
      next = std::min(std::max(next, 0.0), cap[static_cast<std::size_t>(k)]);
      movement = std::max(movement, std::fabs(next - y[static_cast<std::size_t>(k)]));
      y[static_cast<std::size_t>(k)] = next;
    }
    const double value = objective(y);
    if (value > best_value) {
      best_value = value;
      best = y;
    }
    if (movement < tol && it > 32) break;
  }
  return best;
}

MarketState dual_update(MarketState state, const std::vector<Vec>& demands) {
  const std::size_t d = state.lambda.size();
  Vec total(d, 0.0);
  for (const Vec& y : demands) {
    if (y.size() != d) throw ContractViolation("dual_update: demand dimension mismatch");
    for (std::size_t j = 0; j < d; ++j) total[j] += y[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    state.lambda[j] = std::max(0.0, state.lambda[j] + state.alpha * (total[j] - state.supply[j]));
  }
  state.demands = demands;
  state.k += 1;
  return state;
}

MarketResult run_market(std::span<SiteResponder* const> sites, const Vec& supply,
                        const MarketOptions& opts, bool keep_trace) {
  const std::size_t d = supply.size();
  if (sites.empty()) throw ConfigError("run_market: no sites");

  MarketState state;
  state.supply = supply;
  state.lambda = opts.lambda0.empty() ? Vec(d, 0.0) : opts.lambda0;
  if (state.lambda.size() != d) throw ConfigError("run_market: lambda0 dimension mismatch");

  double max_marginal = 0.0;
  for (SiteResponder* s : sites) max_marginal = std::max(max_marginal, s->max_marginal());
  state.alpha = opts.alpha > 0.0
                    ? opts.alpha
                    : 0.5 / (static_cast<double>(sites.size()) * std::max(1e-6, max_marginal));

  MarketResult result;
  result.lambda = state.lambda;
  double best_score = std::numeric_limits<double>::infinity();
  Vec prev_excess;

  for (int it = 0; it < opts.max_iters; ++it) {
    std::vector<Vec> demands;
    demands.reserve(sites.size());
    for (SiteResponder* s : sites) {
      Vec y = s->respond(state.lambda);
      if (y.size() != d) throw ContractViolation("run_market: site demand dimension mismatch");
      demands.push_back(std::move(y));
    }
    Vec excess(d, 0.0);
    for (const Vec& y : demands) {
      for (std::size_t j = 0; j < d; ++j) excess[j] += y[j];
    }
    for (std::size_t j = 0; j < d; ++j) excess[j] -= supply[j];

    if (keep_trace) {
      result.trace.push_back(MarketTraceRow{state.k, state.lambda, demands, excess});
    }

    // Track the best feasible-leaning iterate for the non-convergence return.
    double score = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      score += std::max(excess[j], 0.0) * 16.0 + std::fabs(excess[j]);
    }
    if (score < best_score) {
      best_score = score;
      result.lambda = state.lambda;
      result.demands = demands;
      result.excess = excess;
    }

    // Converged when demand is feasible and each component is either cleared
    // (|excess| <= tol) or priced at zero (free resource).
    bool converged = true;
    for (std::size_t j = 0; j < d; ++j) {
      const bool feasible = excess[j] <= opts.tol;
      const bool cleared = std::fabs(excess[j]) <= opts.tol || state.lambda[j] <= opts.tol;
      if (!feasible || !cleared) {
        converged = false;
        break;
      }
    }
    if (converged) {
      result.lambda = state.lambda;
      result.demands = std::move(demands);
      result.excess = std::move(excess);
      result.converged = true;
      result.iters = it + 1;
      result.complementarity_gap = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        result.complementarity_gap += std::fabs(result.lambda[j] * result.excess[j]);
      }
      return result;
    }

    // Oscillation damping: halve the step when the excess flips sign without
    // shrinking.
    if (opts.adaptive && !prev_excess.empty()) {
      for (std::size_t j = 0; j < d; ++j) {
        if (excess[j] * prev_excess[j] < 0.0 && std::fabs(excess[j]) >= 0.5 * std::fabs(prev_excess[j])) {
          state.alpha = std::max(opts.alpha_min, state.alpha * 0.5);
          break;
        }
      }
    }
    prev_excess = excess;
    state = dual_update(std::move(state), demands);
  }

  result.converged = false;
  result.iters = opts.max_iters;
  result.complementarity_gap = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    result.complementarity_gap += std::fabs(result.lambda[j] * result.excess[j]);
  }
  return result;
}

PwlSite::PwlSite(fit::PwlUtility model, double cap) : model_(std::move(model)), cap_(cap) {
  if (cap_ < 0.0) throw ConfigError("PwlSite: negative cap");
}

Vec PwlSite::respond(const Vec& lambda) {
  if (lambda.size() == 1) return {primal_response_scalar(model_, lambda[0], cap_)};
  return primal_response_vector(model_, lambda, Vec(lambda.size(), cap_));
}

double PwlSite::max_marginal() const {
  double m = 0.0;
  for (const auto& a : model_.anchors()) {
    for (double g : a.g) m = std::max(m, g);
  }
  return m;
}

Vec LogUtilitySite::respond(const Vec& lambda) {
  if (lambda.size() != 1) throw ContractViolation("LogUtilitySite is scalar");
  const double l = lambda[0];
  if (l <= 1e-15) return {cap_};
  return {std::min(cap_, std::max(0.0, c_ / l - 1.0))};
}

}  // namespace dynum::market
