// Test-only oracles, implemented independently of the library's solvers:
// - exact projection onto concave non-decreasing sequences by exhaustive
//   enumeration of active constraint sets (own Gaussian elimination);
// - closed-form two-site log-utility market solution;
// - projected gradient reference for constrained quadratic maximization.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Dense linear solve with partial pivoting; returns false if singular.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (std::fabs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

/// Exhaustive oracle for the scalar concave-monotone least squares problem:
/// enumerate every subset of the n-1 cone constraints as the candidate active
/// set, solve the equality-constrained projection through its KKT system, and
/// keep the best fully feasible candidate. Exact for polyhedral projection.
inline double concave_monotone_best_objective(const std::vector<double>& y,
                                              const std::vector<double>& u) {
  const std::size_t n = y.size();
  if (n <= 1) return 0.0;
  const std::size_t m = n - 1;  // n-2 concavity rows + final-slope row
  std::vector<std::vector<double>> C(m, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double d0 = y[i + 1] - y[i];
    const double d1 = y[i + 2] - y[i + 1];
    C[i][i] = -1.0 / d0;
    C[i][i + 1] = 1.0 / d0 + 1.0 / d1;
    C[i][i + 2] = -1.0 / d1;  // C u_hat >= 0 encodes s_i >= s_{i+1}
  }
  C[m - 1][n - 2] = -1.0 / (y[n - 1] - y[n - 2]);
  C[m - 1][n - 1] = 1.0 / (y[n - 1] - y[n - 2]);  // final slope >= 0

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < (1ull << m); ++mask) {
    std::vector<std::size_t> active;
    for (std::size_t r = 0; r < m; ++r) {
      if (mask & (1ull << r)) active.push_back(r);
    }
    const std::size_t k = active.size();
    // KKT of min ||u_hat - u||^2 s.t. C_S u_hat = 0:
    // [ I  C_S^T ] [u_hat]   [u]
    // [ C_S  0   ] [ mu  ] = [0]
    std::vector<std::vector<double>> kkt(n + k, std::vector<double>(n + k, 0.0));
    std::vector<double> rhs(n + k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      kkt[i][i] = 1.0;
      rhs[i] = u[i];
    }
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t ccol = 0; ccol < n; ++ccol) {
        kkt[ccol][n + r] = C[active[r]][ccol];
        kkt[n + r][ccol] = C[active[r]][ccol];
      }
    }
    std::vector<double> sol;
    if (!solve_linear(kkt, rhs, sol)) continue;
    bool feasible = true;
    for (std::size_t r = 0; r < m && feasible; ++r) {
      double v = 0.0;
      for (std::size_t ccol = 0; ccol < n; ++ccol) v += C[r][ccol] * sol[ccol];
      if (v < -1e-9) feasible = false;
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += (sol[i] - u[i]) * (sol[i] - u[i]);
    best = std::min(best, obj);
  }
  return best;
}

/// Interior closed form for L log-utility sites F_l = c_l ln(1+y):
/// lambda* = sum(c)/(z+L), y_l* = c_l/lambda* - 1 (valid when all y_l* >= 0).
struct LogMarketSolution {
  double lambda;
  std::vector<double> y;
};

inline LogMarketSolution log_market_closed_form(const std::vector<double>& c, double z) {
  double sum = 0.0;
  for (double v : c) sum += v;
  LogMarketSolution sol;
  sol.lambda = sum / (z + static_cast<double>(c.size()));
  for (double v : c) sol.y.push_back(v / sol.lambda - 1.0);
  return sol;
}

/// Euclidean projection onto {x >= 0, sum(x) <= z}.
inline std::vector<double> project_budget(std::vector<double> x, double z) {
  for (double& v : x) v = std::max(0.0, v);
  double sum = 0.0;
  for (double v : x) sum += v;
  if (sum <= z) return x;
  // Project onto the simplex {x >= 0, sum = z} (sorted threshold).
  std::vector<double> s = x;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - z) / static_cast<double>(i + 1);
    if (i + 1 == s.size() || s[i + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (double& v : x) v = std::max(0.0, v - theta);
  return x;
}

/// Reference maximizer of f(x) = b^T x - 0.5 x^T M x over {x>=0, sum<=z} via
/// projected gradient with fixed step 1/Lmax.
inline std::vector<double> quadratic_max_on_budget(const std::vector<std::vector<double>>& M,
                                                   const std::vector<double>& b, double z,
                                                   double lmax, double tol = 1e-12,
                                                   int max_iters = 400000) {
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0);
  const double step = 1.0 / lmax;
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double mv = 0.0;
      for (std::size_t j = 0; j < n; ++j) mv += M[i][j] * x[j];
      grad[i] = b[i] - mv;
    }
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = x[i] + step * grad[i];
    next = project_budget(std::move(next), z);
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::fabs(next[i] - x[i]));
    x = std::move(next);
    if (delta < tol) break;
  }
  return x;
}

}  // namespace oracle
