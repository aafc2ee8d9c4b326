#include "dynum/concave_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dynum/errors.hpp"
#include "dynum/linalg.hpp"
#include "dynum/strings.hpp"

namespace dynum::fit {

namespace {

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stod(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

}  // namespace

PwlUtility::PwlUtility(std::vector<Anchor> anchors) : anchors_(std::move(anchors)) {
  for (const Anchor& a : anchors_) {
    if (a.y.size() != anchors_.front().y.size() || a.g.size() != a.y.size()) {
      throw ContractViolation("PwlUtility: inconsistent anchor dimensions");
    }
  }
}

double PwlUtility::evaluate(std::span<const double> y) const {
  if (anchors_.empty()) return 0.0;
  if (static_cast<int>(y.size()) != dim()) throw ContractViolation("PwlUtility: dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (const Anchor& a : anchors_) {
    double v = a.u_hat;
    for (std::size_t k = 0; k < a.y.size(); ++k) v += a.g[k] * (y[k] - a.y[k]);
    best = std::min(best, v);
  }
  return best;
}

double PwlUtility::evaluate(double y) const { return evaluate(std::span<const double>(&y, 1)); }

bool PwlUtility::check_invariants(double tol) const {
  for (const Anchor& a : anchors_) {
    for (double gk : a.g) {
      if (gk < -tol) return false;
    }
  }
  for (const Anchor& ai : anchors_) {
    for (const Anchor& aj : anchors_) {
      double bound = ai.u_hat;
      for (std::size_t k = 0; k < ai.y.size(); ++k) bound += ai.g[k] * (aj.y[k] - ai.y[k]);
      if (aj.u_hat > bound + tol) return false;
    }
  }
  return true;
}

std::string PwlUtility::to_text() const {
  std::ostringstream out;
  out << "dynum-pwl v1\n";
  out << "dim " << dim() << "\n";
  out << "anchors " << size() << "\n";
  for (const Anchor& a : anchors_) {
    out << "anchor y=";
    for (std::size_t k = 0; k < a.y.size(); ++k) out << (k ? "," : "") << fmt_double(a.y[k]);
    out << " u=" << fmt_double(a.u_hat) << " g=";
    for (std::size_t k = 0; k < a.g.size(); ++k) out << (k ? "," : "") << fmt_double(a.g[k]);
    out << "\n";
  }
  return out.str();
}

PwlUtility PwlUtility::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [](const std::string& why) { return DecodeError("pwl parse error: " + why, 0); };
  if (!std::getline(in, line) || line != "dynum-pwl v1") throw fail("bad header");
  std::string word;
  int dim = 0, count = 0;
  if (!(in >> word >> dim) || word != "dim") throw fail("missing dim");
  if (!(in >> word >> count) || word != "anchors") throw fail("missing anchor count");
  std::vector<Anchor> anchors;
  for (int i = 0; i < count; ++i) {
    Anchor a;
    std::string ys, us, gs;
    if (!(in >> word >> ys >> us >> gs) || word != "anchor") throw fail("bad anchor record");
    if (ys.rfind("y=", 0) != 0 || us.rfind("u=", 0) != 0 || gs.rfind("g=", 0) != 0) {
      throw fail("bad anchor fields");
    }
    a.y = parse_csv_doubles(ys.substr(2));
    a.u_hat = std::stod(us.substr(2));
    a.g = parse_csv_doubles(gs.substr(2));
    if (static_cast<int>(a.y.size()) != dim || static_cast<int>(a.g.size()) != dim) {
      throw fail("anchor dimension mismatch");
    }
    anchors.push_back(std::move(a));
  }
  return PwlUtility(std::move(anchors));
}

namespace {

/// Exact scalar path: with anchors sorted by y, feasibility of (u_hat, g) is
/// equivalent to the value sequence being concave with nonnegative final
/// slope, so the QP reduces to projecting u onto that polyhedral cone. The
/// projection is solved through its nonnegative least squares dual.
PwlUtility fit_scalar(std::vector<std::pair<double, double>> samples, FitReport* report) {
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const int n = static_cast<int>(samples.size());
  for (int i = 0; i + 1 < n; ++i) {
    if (samples[static_cast<std::size_t>(i)].first == samples[static_cast<std::size_t>(i) + 1].first) {
      throw ConfigError("fit_concave_monotone: duplicate sample points");
    }
  }

  std::vector<double> u(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = samples[static_cast<std::size_t>(i)].second;

  std::vector<double> u_hat = u;
  la::NnlsResult dual;
  double feasibility = 0.0, complementarity = 0.0;

  if (n >= 2) {
    std::vector<double> delta(static_cast<std::size_t>(n) - 1);
    for (int i = 0; i + 1 < n; ++i) {
      delta[static_cast<std::size_t>(i)] =
          samples[static_cast<std::size_t>(i) + 1].first - samples[static_cast<std::size_t>(i)].first;
    }
    // Constraints C u_hat >= 0: concavity between adjacent slope pairs and a
    // nonnegative final slope. Dual: nu* = nnls(C^T... ) with A = -C.
    const int m = n - 1;  // (n-2) concavity rows + 1 monotone row
    la::Matrix A(m, n);   // A u_hat <= 0
    for (int i = 0; i + 2 < n; ++i) {
      const double di = delta[static_cast<std::size_t>(i)];
      const double di1 = delta[static_cast<std::size_t>(i) + 1];
      A.at(i, i) = 1.0 / di;
      A.at(i, i + 1) = -(1.0 / di + 1.0 / di1);
      A.at(i, i + 2) = 1.0 / di1;
    }
    A.at(m - 1, n - 2) = 1.0 / delta[static_cast<std::size_t>(n) - 2];
    A.at(m - 1, n - 1) = -1.0 / delta[static_cast<std::size_t>(n) - 2];

    // min 1/2||u_hat - u||^2 s.t. A u_hat <= 0  <=>  nu* = argmin_{nu>=0} ||A^T nu - u||,
    // u_hat = u - A^T nu*.
    la::Matrix At(n, m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < n; ++c) At.at(c, r) = A.at(r, c);
    }
    dual = la::nnls(At, u);
    const std::vector<double> atnu = la::matvec(At, dual.x);
    for (int i = 0; i < n; ++i) u_hat[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)] - atnu[static_cast<std::size_t>(i)];

    const std::vector<double> au = la::matvec(A, u_hat);
    for (int r = 0; r < m; ++r) {
      feasibility = std::max(feasibility, au[static_cast<std::size_t>(r)]);
      complementarity = std::max(complementarity,
                                 std::fabs(dual.x[static_cast<std::size_t>(r)] * au[static_cast<std::size_t>(r)]));
    }
  }

  // Gradients: forward secants; the last anchor extends the final segment.
  std::vector<Anchor> anchors(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    anchors[static_cast<std::size_t>(i)].y = {samples[static_cast<std::size_t>(i)].first};
    anchors[static_cast<std::size_t>(i)].u_hat = u_hat[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < n; ++i) {
    double g;
    if (n == 1) {
      g = 0.0;
    } else if (i + 1 < n) {
      g = (u_hat[static_cast<std::size_t>(i) + 1] - u_hat[static_cast<std::size_t>(i)]) /
          (samples[static_cast<std::size_t>(i) + 1].first - samples[static_cast<std::size_t>(i)].first);
    } else {
      g = (u_hat[static_cast<std::size_t>(i)] - u_hat[static_cast<std::size_t>(i) - 1]) /
          (samples[static_cast<std::size_t>(i)].first - samples[static_cast<std::size_t>(i) - 1].first);
    }
    anchors[static_cast<std::size_t>(i)].g = {std::max(0.0, g)};
  }

  if (report) {
    report->objective = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = u_hat[static_cast<std::size_t>(i)] - u[static_cast<std::size_t>(i)];
      report->objective += r * r;
    }
    report->kkt_feasibility = std::max(0.0, feasibility);
    report->kkt_complementarity = complementarity;
    report->kkt_stationarity = 0.0;  // u_hat = u - A^T nu holds by construction
    report->iterations = dual.iterations;
    report->method = "scalar-nnls";
  }
  return PwlUtility(std::move(anchors));
}

/// General path (dim >= 2): full pairwise QP in (u_hat, g) with a tiny ridge
/// on g, solved through its NNLS dual.
PwlUtility fit_general(const std::vector<std::pair<std::vector<double>, double>>& samples,
                       FitReport* report) {
  const int n = static_cast<int>(samples.size());
  const int d = static_cast<int>(samples.front().first.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (samples[static_cast<std::size_t>(i)].first == samples[static_cast<std::size_t>(j)].first) {
        throw ConfigError("fit_concave_monotone: duplicate sample points");
      }
    }
  }
  const int nv = n + n * d;              // variables: u_hat then g (row-major by anchor)
  const int mc = n * (n - 1) + n * d;    // pairwise hyperplanes + g >= 0
  const double rho = 1e-10;              // ridge on g; keeps the dual Hessian definite
  const double inv_sqrt_rho = 1.0 / std::sqrt(rho);

  // Constraint matrix rows (A x <= 0), built column-wise into M = H^{-1/2} A^T.
  la::Matrix M(nv, mc);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      // u_hat_j - u_hat_i - g_i^T (y_j - y_i) <= 0
      M.at(j, col) += 1.0;
      M.at(i, col) -= 1.0;
      for (int k = 0; k < d; ++k) {
        const double dy = samples[static_cast<std::size_t>(j)].first[static_cast<std::size_t>(k)] -
                          samples[static_cast<std::size_t>(i)].first[static_cast<std::size_t>(k)];
        M.at(n + i * d + k, col) -= dy * inv_sqrt_rho;
      }
      ++col;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      M.at(n + i * d + k, col) = -1.0 * inv_sqrt_rho;  // -g_ik <= 0
      ++col;
    }
  }

  std::vector<double> rhs(static_cast<std::size_t>(nv), 0.0);
  for (int i = 0; i < n; ++i) rhs[static_cast<std::size_t>(i)] = samples[static_cast<std::size_t>(i)].second;

  const la::NnlsResult dual = la::nnls(M, rhs);
  // x = H^{-1}(c - A^T nu); in scaled coordinates x = H^{-1/2}(rhs - M nu).
  const std::vector<double> mnu = la::matvec(M, dual.x);
  std::vector<Anchor> anchors(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    anchors[static_cast<std::size_t>(i)].y = samples[static_cast<std::size_t>(i)].first;
    anchors[static_cast<std::size_t>(i)].u_hat =
        rhs[static_cast<std::size_t>(i)] - mnu[static_cast<std::size_t>(i)];
    anchors[static_cast<std::size_t>(i)].g.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      const double gv = -mnu[static_cast<std::size_t>(n + i * d + k)] * inv_sqrt_rho;
      anchors[static_cast<std::size_t>(i)].g[static_cast<std::size_t>(k)] = std::max(0.0, gv);
    }
  }

  if (report) {
    report->objective = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = anchors[static_cast<std::size_t>(i)].u_hat - samples[static_cast<std::size_t>(i)].second;
      report->objective += r * r;
    }
    double feas = 0.0, compl_ = 0.0;
    col = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        double v = anchors[static_cast<std::size_t>(j)].u_hat - anchors[static_cast<std::size_t>(i)].u_hat;
        for (int k = 0; k < d; ++k) {
          const double dy = samples[static_cast<std::size_t>(j)].first[static_cast<std::size_t>(k)] -
                            samples[static_cast<std::size_t>(i)].first[static_cast<std::size_t>(k)];
          v -= anchors[static_cast<std::size_t>(i)].g[static_cast<std::size_t>(k)] * dy;
        }
        feas = std::max(feas, v);
        compl_ = std::max(compl_, std::fabs(v * dual.x[static_cast<std::size_t>(col)]));
        ++col;
      }
    }
    report->kkt_feasibility = feas;
    report->kkt_complementarity = compl_;
    report->kkt_stationarity = 2.0 * rho;  // |grad_g L| <= 2*rho*|g|; vanishes with the ridge
    report->iterations = dual.iterations;
    report->method = "general-nnls";
  }
  return PwlUtility(std::move(anchors));
}

}  // namespace

PwlUtility fit_concave_monotone(const std::vector<std::pair<std::vector<double>, double>>& samples,
                                FitReport* report) {
  if (samples.empty()) throw ConfigError("fit_concave_monotone: need at least one sample");
  const std::size_t d = samples.front().first.size();
  if (d == 0) throw ConfigError("fit_concave_monotone: zero-dimensional samples");
  for (const auto& s : samples) {
    if (s.first.size() != d) throw ConfigError("fit_concave_monotone: inconsistent dimensions");
    if (!std::isfinite(s.second)) throw ConfigError("fit_concave_monotone: non-finite sample value");
  }
  if (d == 1) {
    std::vector<std::pair<double, double>> scalar;
    scalar.reserve(samples.size());
    for (const auto& s : samples) scalar.emplace_back(s.first[0], s.second);
    return fit_scalar(std::move(scalar), report);
  }
  return fit_general(samples, report);
}

PwlUtility fit_concave_monotone(const std::vector<std::pair<double, double>>& samples,
                                FitReport* report) {
  if (samples.empty()) throw ConfigError("fit_concave_monotone: need at least one sample");
  for (const auto& s : samples) {
    if (!std::isfinite(s.second)) throw ConfigError("fit_concave_monotone: non-finite sample value");
  }
  return fit_scalar(samples, report);
}

double epsilon_proxy(const PwlUtility& model,
                     const std::vector<std::pair<std::vector<double>, double>>& samples) {
  double eps = 0.0;
  for (const auto& [y, u] : samples) {
    eps = std::max(eps, std::fabs(model.evaluate(std::span<const double>(y.data(), y.size())) - u));
  }
  return eps;
}

GapCertificate gap_bound(double epsilon, double m_f, bool proxy_based) {
  if (!(m_f > 0.0)) throw std::domain_error("gap_bound: m_f must be positive");
  if (!(epsilon >= 0.0)) throw std::domain_error("gap_bound: epsilon must be >= 0");
  GapCertificate c;
  c.epsilon = epsilon;
  c.m_f = m_f;
  c.bound = 2.0 * std::sqrt(epsilon / m_f);
  c.proxy_based = proxy_based;
  return c;
}

}  // namespace dynum::fit
