#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dynum::fit {

/// One supporting hyperplane of the fitted surrogate: value u_hat and
/// gradient g (componentwise >= 0) at sample point y.
struct Anchor {
  std::vector<double> y;
  double u_hat = 0.0;
  std::vector<double> g;
};

/// Concave non-decreasing piecewise-linear surrogate, represented as the
/// pointwise minimum of its supporting hyperplanes.
class PwlUtility {
 public:
  PwlUtility() = default;
  explicit PwlUtility(std::vector<Anchor> anchors);

  int dim() const { return anchors_.empty() ? 0 : static_cast<int>(anchors_.front().y.size()); }
  int size() const { return static_cast<int>(anchors_.size()); }
  bool empty() const { return anchors_.empty(); }
  const std::vector<Anchor>& anchors() const { return anchors_; }

  /// min_i { u_hat_i + g_i^T (y - y_i) }.
  double evaluate(std::span<const double> y) const;
  double evaluate(double y) const;  // scalar convenience

  /// Pairwise hyperplane consistency and g >= 0, within tolerance.
  bool check_invariants(double tol = 1e-8) const;

  /// Documented text serialization; round-trip exact (see docs/formats.md).
  std::string to_text() const;
  static PwlUtility from_text(std::string_view text);

 private:
  std::vector<Anchor> anchors_;
};

struct FitReport {
  double objective = 0.0;          // sum of squared residuals
  double kkt_feasibility = 0.0;    // max constraint violation of the solution
  double kkt_complementarity = 0.0;
  double kkt_stationarity = 0.0;
  int iterations = 0;
  std::string method;
};

/// Least-squares fit of a concave non-decreasing PWL surrogate:
///   min sum_i (u_hat_i - u_i)^2
///   s.t. u_hat_j <= u_hat_i + g_i^T (y_j - y_i) for all i, j;  g_i >= 0.
/// Scalar inputs use the reduced adjacent-pair formulation (exact); higher
/// dimensions solve the full pairwise QP. Throws ConfigError on duplicate
/// sample points and SolverFailure when residuals cannot be met.
PwlUtility fit_concave_monotone(const std::vector<std::pair<std::vector<double>, double>>& samples,
                                FitReport* report = nullptr);

/// Scalar convenience overload.
PwlUtility fit_concave_monotone(const std::vector<std::pair<double, double>>& samples,
                                FitReport* report = nullptr);

/// Largest absolute sample residual |u_hat_i - u_i|; the computable proxy for
/// the sup-norm surrogate error.
double epsilon_proxy(const PwlUtility& model,
                     const std::vector<std::pair<std::vector<double>, double>>& samples);

/// Optimality-gap certificate: ||Y* - Yhat*|| <= bound = 2*sqrt(eps/m_f).
struct GapCertificate {
  double epsilon = 0.0;
  double m_f = 0.0;
  double bound = 0.0;
  /// True when epsilon is the sampled proxy rather than a verified sup-norm bound.
  bool proxy_based = true;
};

/// Throws std::domain_error for m_f <= 0 or eps < 0.
GapCertificate gap_bound(double epsilon, double m_f, bool proxy_based = true);

}  // namespace dynum::fit
