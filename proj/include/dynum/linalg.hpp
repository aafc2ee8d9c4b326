#pragma once

#include <vector>

namespace dynum::la {

/// Minimal dense row-major matrix for the small QP/NNLS problems in this
/// project (a few hundred variables at most).
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

std::vector<double> matvec(const Matrix& m, const std::vector<double>& x);
std::vector<double> matTvec(const Matrix& m, const std::vector<double>& x);

/// Least squares min ||Ax - b|| via Householder QR. Throws SolverFailure on
/// (numerically) rank-deficient systems.
std::vector<double> lstsq(Matrix A, std::vector<double> b);

struct NnlsResult {
  std::vector<double> x;
  int iterations = 0;
  double gradient_residual = 0.0;  // max over active coordinates of the dual gradient
};

/// min ||Ax - b|| subject to x >= 0 (Lawson-Hanson active set).
NnlsResult nnls(const Matrix& A, const std::vector<double>& b, int max_iters = 0);

}  // namespace dynum::la
