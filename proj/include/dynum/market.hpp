#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dynum/concave_fit.hpp"

namespace dynum::market {

using Vec = std::vector<double>;

/// Dual state of the resource market: prices, iteration counter, step size,
/// total supply and the latest per-site demands.
struct MarketState {
  Vec lambda;
  int k = 0;
  double alpha = 0.1;
  Vec supply;
  std::vector<Vec> demands;
};

/// What the coordinator needs from a site: the utility-maximizing demand at
/// the posted price. Implementations may be local surrogates, analytic
/// oracles, or remote agents.
class SiteResponder {
 public:
  virtual ~SiteResponder() = default;
  virtual Vec respond(const Vec& lambda) = 0;
  /// Estimate of the largest marginal utility (used for the default step size).
  virtual double max_marginal() const { return 1.0; }
};

/// argmax_{0 <= y <= cap} F(y) - lambda*y for a scalar PWL surrogate.
/// Exact: the objective is concave piecewise linear, so the maximizer is
/// scanned over segment endpoints; ties return the smallest maximizer.
double primal_response_scalar(const fit::PwlUtility& model, double lambda, double cap);

/// Vector allocations: projected supergradient ascent on F(y) - lambda^T y
/// over the box [0, cap].
Vec primal_response_vector(const fit::PwlUtility& model, const Vec& lambda, const Vec& cap,
                           double tol = 1e-6, int max_iters = 20000);

/// lambda <- [lambda + alpha (sum demands - supply)]^+; increments k.
MarketState dual_update(MarketState state, const std::vector<Vec>& demands);

struct MarketOptions {
  double alpha = -1.0;    // <= 0: auto 0.5 / (L * max marginal)
  double alpha_min = 1e-9;
  int max_iters = 10000;
  double tol = 1e-6;
  bool adaptive = true;   // halve alpha when excess demand oscillates
  Vec lambda0;            // empty: zeros
};

struct MarketTraceRow {
  int k = 0;
  Vec lambda;
  std::vector<Vec> demands;
  Vec excess;
};

struct MarketResult {
  Vec lambda;
  std::vector<Vec> demands;
  Vec excess;
  bool converged = false;
  int iters = 0;
  double complementarity_gap = 0.0;  // |lambda^T excess| at the returned iterate
  std::vector<MarketTraceRow> trace;
};

/// Runs the price iteration until (componentwise) excess <= tol and either the
/// price or the excess magnitude is within tol, or max_iters. On
/// non-convergence returns the best iterate seen (smallest feasible excess
/// norm) with diagnostics.
MarketResult run_market(std::span<SiteResponder* const> sites, const Vec& supply,
                        const MarketOptions& opts, bool keep_trace = true);

/// Backing a site by a fitted scalar surrogate capped at `cap`.
class PwlSite final : public SiteResponder {
 public:
  PwlSite(fit::PwlUtility model, double cap);
  Vec respond(const Vec& lambda) override;
  double max_marginal() const override;
  const fit::PwlUtility& model() const { return model_; }
  void set_model(fit::PwlUtility model) { model_ = std::move(model); }

 private:
  fit::PwlUtility model_;
  double cap_;
};

/// Smooth concave oracle site F(y) = c*ln(1+y) on [0, cap]; closed-form
/// response y*(lambda) = clamp(c/lambda - 1, 0, cap).
class LogUtilitySite final : public SiteResponder {
 public:
  LogUtilitySite(double c, double cap) : c_(c), cap_(cap) {}
  Vec respond(const Vec& lambda) override;
  double max_marginal() const override { return c_; }

 private:
  double c_;
  double cap_;
};

}  // namespace dynum::market
