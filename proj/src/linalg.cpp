#include "dynum/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynum/errors.hpp"

namespace dynum::la {

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(m.rows), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    for (int c = 0; c < m.cols; ++c) acc += m.at(r, c) * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = acc;
  }
  return y;
}

std::vector<double> matTvec(const Matrix& m, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(m.cols), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double xr = x[static_cast<std::size_t>(r)];
    for (int c = 0; c < m.cols; ++c) y[static_cast<std::size_t>(c)] += m.at(r, c) * xr;
  }
  return y;
}

std::vector<double> lstsq(Matrix A, std::vector<double> b) {
  const int m = A.rows, n = A.cols;
  if (m < n) throw ContractViolation("lstsq: underdetermined system");
  // Householder QR, transforming b along the way.
  for (int k = 0; k < n; ++k) {
    double norm = 0.0;
    for (int i = k; i < m; ++i) norm += A.at(i, k) * A.at(i, k);
    norm = std::sqrt(norm);
    if (norm < 1e-13) {
      throw SolverFailure("lstsq: rank-deficient system", norm, 0.0);
    }
    if (A.at(k, k) > 0) norm = -norm;
    for (int i = k; i < m; ++i) A.at(i, k) /= norm;
    A.at(k, k) -= 1.0;
    for (int j = k + 1; j < n; ++j) {
      double s = 0.0;
      for (int i = k; i < m; ++i) s += A.at(i, k) * A.at(i, j);
      s /= A.at(k, k);
      for (int i = k; i < m; ++i) A.at(i, j) += s * A.at(i, k);
    }
    double s = 0.0;
    for (int i = k; i < m; ++i) s += A.at(i, k) * b[static_cast<std::size_t>(i)];
    s /= A.at(k, k);
    for (int i = k; i < m; ++i) b[static_cast<std::size_t>(i)] += s * A.at(i, k);
    A.at(k, k) = norm;  // store R diagonal
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int k = n - 1; k >= 0; --k) {
    double s = b[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < n; ++j) s -= A.at(k, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(k)] = s / A.at(k, k);
  }
  return x;
}

NnlsResult nnls(const Matrix& A, const std::vector<double>& b, int max_iters) {
  const int n = A.cols;
  if (max_iters <= 0) max_iters = 3 * std::max(n, 16);

  NnlsResult res;
  res.x.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<char> passive(static_cast<std::size_t>(n), 0);

  // Gradient of 1/2||Ax-b||^2 is A^T(Ax-b); w = -grad.
  auto gradient = [&](const std::vector<double>& x) {
    std::vector<double> r = matvec(A, x);
    for (int i = 0; i < A.rows; ++i) r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
    return matTvec(A, r);
  };

  double bnorm = 0.0;
  for (double v : b) bnorm = std::max(bnorm, std::fabs(v));
  const double tol = 1e-12 * std::max(1.0, bnorm) * std::max(1, A.rows);

  auto solve_passive = [&]() {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i) {
      if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    Matrix Ap(A.rows, static_cast<int>(idx.size()));
    for (int r = 0; r < A.rows; ++r) {
      for (std::size_t c = 0; c < idx.size(); ++c) Ap.at(r, static_cast<int>(c)) = A.at(r, idx[c]);
    }
    const std::vector<double> z = lstsq(Ap, b);
    std::vector<double> full(static_cast<std::size_t>(n), 0.0);
    for (std::size_t c = 0; c < idx.size(); ++c) full[static_cast<std::size_t>(idx[c])] = z[c];
    return full;
  };

  for (int outer = 0; outer < max_iters; ++outer) {
    const std::vector<double> w = gradient(res.x);
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && w[static_cast<std::size_t>(i)] > best_w) {
        best_w = w[static_cast<std::size_t>(i)];
        best = i;
      }
    }
    if (best < 0) {
      res.gradient_residual = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!passive[static_cast<std::size_t>(i)]) {
          res.gradient_residual = std::max(res.gradient_residual, w[static_cast<std::size_t>(i)]);
        }
      }
      return res;  // KKT satisfied
    }
    passive[static_cast<std::size_t>(best)] = 1;

    for (int inner = 0; inner < max_iters; ++inner) {
      ++res.iterations;
      std::vector<double> z = solve_passive();
      bool all_positive = true;
      for (int i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && z[static_cast<std::size_t>(i)] <= 0.0) {
          all_positive = false;
          break;
        }
      }
      if (all_positive) {
        res.x = std::move(z);
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (!passive[static_cast<std::size_t>(i)]) continue;
        const double zi = z[static_cast<std::size_t>(i)];
        if (zi <= 0.0) {
          const double xi = res.x[static_cast<std::size_t>(i)];
          alpha = std::min(alpha, xi / (xi - zi));
        }
      }
      for (int i = 0; i < n; ++i) {
        if (!passive[static_cast<std::size_t>(i)]) continue;
        auto& xi = res.x[static_cast<std::size_t>(i)];
        xi += alpha * (z[static_cast<std::size_t>(i)] - xi);
        if (xi <= 1e-14) {
          xi = 0.0;
          passive[static_cast<std::size_t>(i)] = 0;
        }
      }
    }
  }
  const std::vector<double> w = gradient(res.x);
  double resid = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!passive[static_cast<std::size_t>(i)]) resid = std::max(resid, w[static_cast<std::size_t>(i)]);
  }
  throw SolverFailure("nnls: iteration limit reached", resid, 0.0);
}

}  // namespace dynum::la
