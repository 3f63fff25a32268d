#include "sttopo/krylov.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "sttopo/error.hpp"
#include "sttopo/parallel.hpp"

namespace sttopo {

void SolverConfig::validate() const {
  std::ostringstream os;
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(outer_rtol)) os << "outer_rtol must be in (0,1); ";
  if (!in_unit(smoother_rtol)) os << "smoother_rtol must be in (0,1); ";
  if (smoother_maxit < 1) os << "smoother_maxit must be >= 1; ";
  if (coarse_maxit < 1) os << "coarse_maxit must be >= 1; ";
  if (outer_maxit < 1) os << "outer_maxit must be >= 1; ";
  if (restart < 1) os << "restart must be >= 1; ";
  if (!os.str().empty()) throw ConfigError("invalid solver config: " + os.str());
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::Breakdown: return "breakdown";
  }
  return "unknown";
}

JacobiPreconditioner::JacobiPreconditioner(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("Jacobi needs a square matrix");
  inv_diag_ = a.diagonal();
  for (std::size_t i = 0; i < inv_diag_.size(); ++i) {
    if (inv_diag_[i] == 0.0) {
      throw SolverError("Jacobi preconditioner undefined: zero diagonal in row " +
                        std::to_string(i));
    }
    inv_diag_[i] = 1.0 / inv_diag_[i];
  }
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const auto n = static_cast<std::ptrdiff_t>(r.size());
  const double* d = inv_diag_.data();
#pragma omp parallel for schedule(static) if (n > 65536)
  for (std::ptrdiff_t i = 0; i < n; ++i) z[i] = d[i] * r[i];
}

namespace {

struct Givens {
  static void generate(double a, double b, double& c, double& s) {
    if (b == 0.0) {
      c = 1.0;
      s = 0.0;
    } else if (std::abs(b) > std::abs(a)) {
      const double t = a / b;
      s = 1.0 / std::sqrt(1.0 + t * t);
      c = t * s;
    } else {
      const double t = b / a;
      c = 1.0 / std::sqrt(1.0 + t * t);
      s = t * c;
    }
  }
};

// Column-major (m+1) x m Hessenberg storage.
inline double& h_at(std::vector<double>& h, int ld, int i, int j) {
  return h[static_cast<std::size_t>(j) * ld + i];
}

// Applies previous rotations to column j, builds the new one, updates g.
// Returns |g[j+1]|.
double rotate_column(std::vector<double>& h, int ld, int j, std::vector<double>& cs,
                     std::vector<double>& sn, std::vector<double>& g) {
  for (int i = 0; i < j; ++i) {
    const double a = h_at(h, ld, i, j);
    const double b = h_at(h, ld, i + 1, j);
    h_at(h, ld, i, j) = cs[i] * a + sn[i] * b;
    h_at(h, ld, i + 1, j) = -sn[i] * a + cs[i] * b;
  }
  Givens::generate(h_at(h, ld, j, j), h_at(h, ld, j + 1, j), cs[j], sn[j]);
  h_at(h, ld, j, j) = cs[j] * h_at(h, ld, j, j) + sn[j] * h_at(h, ld, j + 1, j);
  h_at(h, ld, j + 1, j) = 0.0;
  g[j + 1] = -sn[j] * g[j];
  g[j] = cs[j] * g[j];
  return std::abs(g[j + 1]);
}

// Back substitution on the k x k triangle. Returns false on a zero pivot.
bool solve_triangle(std::vector<double>& h, int ld, int k, const std::vector<double>& g,
                    std::vector<double>& y) {
  y.assign(static_cast<std::size_t>(k), 0.0);
  double hmax = 0.0;
  for (int i = 0; i < k; ++i) hmax = std::max(hmax, std::abs(h_at(h, ld, i, i)));
  for (int i = k - 1; i >= 0; --i) {
    double s = g[i];
    for (int j = i + 1; j < k; ++j) s -= h_at(h, ld, i, j) * y[j];
    const double d = h_at(h, ld, i, i);
    if (std::abs(d) <= 1e-14 * hmax || d == 0.0) return false;
    y[i] = s / d;
  }
  return true;
}

}  // namespace

KrylovResult gmres(const SparseMatrix& a, const JacobiPreconditioner& jacobi,
                   std::span<const double> b, std::span<double> x, double rtol, int maxit,
                   int restart, GmresWorkspace* workspace) {
  const auto n = static_cast<std::size_t>(a.rows());
  if (a.rows() != a.cols() || b.size() != n || x.size() != n) {
    throw DimensionError("gmres dimension mismatch");
  }
  const int m = restart > 0 ? std::min(restart, maxit) : maxit;
  GmresWorkspace local;
  GmresWorkspace& ws = workspace ? *workspace : local;
  if (ws.basis.size() < static_cast<std::size_t>(m + 1)) ws.basis.resize(m + 1);
  for (int i = 0; i <= m; ++i) ws.basis[i].resize(n);
  ws.w.resize(n);
  const int ld = m + 1;
  ws.hessenberg.assign(static_cast<std::size_t>(ld) * m, 0.0);
  ws.g.assign(m + 1, 0.0);
  ws.cs.assign(m, 0.0);
  ws.sn.assign(m, 0.0);

  KrylovResult result;
  auto& r = ws.basis[0];
  a.residual(b, x, ws.w);
  jacobi.apply(ws.w, r);
  double beta = norm2(r);
  const double beta0 = beta;
  if (beta0 == 0.0) {
    result.converged = true;
    return result;
  }
  const double target = rtol * beta0;

  while (result.iterations < maxit) {
    scale(1.0 / beta, r);
    std::fill(ws.g.begin(), ws.g.end(), 0.0);
    ws.g[0] = beta;
    int k = 0;
    double resid = beta;
    bool happy = false;
    for (int j = 0; j < m && result.iterations < maxit; ++j) {
      a.multiply(ws.basis[j], ws.w);
      jacobi.apply(ws.w, ws.w);
      for (int i = 0; i <= j; ++i) {
        const double hij = dot(ws.w, ws.basis[i]);
        h_at(ws.hessenberg, ld, i, j) = hij;
        axpy(-hij, ws.basis[i], ws.w);
      }
      const double hnext = norm2(ws.w);
      h_at(ws.hessenberg, ld, j + 1, j) = hnext;
      resid = rotate_column(ws.hessenberg, ld, j, ws.cs, ws.sn, ws.g);
      ++result.iterations;
      k = j + 1;
      if (hnext == 0.0) {
        happy = true;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) ws.basis[j + 1][i] = ws.w[i] / hnext;
      if (resid <= target) break;
    }
    if (!solve_triangle(ws.hessenberg, ld, k, ws.g, ws.y)) {
      throw SolverError("gmres: singular Hessenberg matrix");
    }
    for (int i = 0; i < k; ++i) axpy(ws.y[i], ws.basis[i], x);
    if (resid <= target || happy) {
      result.converged = resid <= target || happy;
      result.relative_residual = resid / beta0;
      if (happy) result.relative_residual = 0.0;
      return result;
    }
    if (result.iterations >= maxit) {
      result.relative_residual = resid / beta0;
      return result;
    }
    a.residual(b, x, ws.w);
    jacobi.apply(ws.w, r);
    beta = norm2(r);
    if (beta <= target) {
      result.converged = true;
      result.relative_residual = beta / beta0;
      return result;
    }
    std::fill(ws.hessenberg.begin(), ws.hessenberg.end(), 0.0);
  }
  result.relative_residual = beta / beta0;
  return result;
}

SolverStats fgmres(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                   const Preconditioner& preconditioner, const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto n = static_cast<std::size_t>(a.rows());
  if (a.rows() != a.cols() || b.size() != n || x.size() != n) {
    throw DimensionError("fgmres dimension mismatch");
  }
  config.validate();
  const int m = config.restart;
  const int ld = m + 1;

  SolverStats stats;
  std::vector<double> r(n);
  a.residual(b, x, r);
  double beta = norm2(r);
  const double bnorm = norm2(b);
  const double reference = bnorm > 0.0 ? bnorm : beta;
  const double target = config.outer_rtol * reference;
  stats.initial_residual = beta;
  stats.residual_history.push_back(beta);

  auto finish = [&](SolveStatus status, double resid) {
    stats.status = status;
    stats.final_relative_residual = reference > 0.0 ? resid / reference : 0.0;
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return stats;
  };

  if (beta <= target || beta == 0.0) return finish(SolveStatus::Converged, beta);

  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> z;
  std::vector<double> w(n);
  std::vector<double> h(static_cast<std::size_t>(ld) * m, 0.0);
  std::vector<double> g(m + 1), cs(m), sn(m), y;

  while (true) {
    if (v.empty()) v.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    std::fill(h.begin(), h.end(), 0.0);
    g[0] = beta;
    int k = 0;
    bool breakdown = false;
    double resid = beta;
    for (int j = 0; j < m && stats.outer_iterations < config.outer_maxit; ++j) {
      if (static_cast<int>(z.size()) <= j) z.emplace_back(n);
      preconditioner(v[j], z[j]);
      a.multiply(z[j], w);
      for (int i = 0; i <= j; ++i) {
        const double hij = dot(w, v[i]);
        h_at(h, ld, i, j) = hij;
        axpy(-hij, v[i], w);
      }
      const double hnext = norm2(w);
      h_at(h, ld, j + 1, j) = hnext;
      resid = rotate_column(h, ld, j, cs, sn, g);
      ++stats.outer_iterations;
      stats.residual_history.push_back(resid);
      k = j + 1;
      if (hnext <= std::numeric_limits<double>::min()) {
        breakdown = true;
        break;
      }
      if (static_cast<int>(v.size()) <= j + 1) v.emplace_back(n);
      for (std::size_t i = 0; i < n; ++i) v[j + 1][i] = w[i] / hnext;
      if (resid <= target) break;
    }
    if (!solve_triangle(h, ld, k, g, y)) {
      // Flexible Arnoldi can produce a singular least-squares system.
      a.residual(b, x, r);
      return finish(SolveStatus::Breakdown, norm2(r));
    }
    for (int i = 0; i < k; ++i) axpy(y[i], z[i], x);
    a.residual(b, x, r);
    beta = norm2(r);
    if (beta <= target) return finish(SolveStatus::Converged, beta);
    if (breakdown) return finish(SolveStatus::Breakdown, beta);
    if (stats.outer_iterations >= config.outer_maxit) {
      return finish(SolveStatus::MaxIterations, beta);
    }
  }
}

KrylovResult conjugate_gradient(const SparseMatrix& a, std::span<const double> b,
                                std::span<double> x, double rtol, int maxit) {
  const auto n = static_cast<std::size_t>(a.rows());
  if (a.rows() != a.cols() || b.size() != n || x.size() != n) {
    throw DimensionError("cg dimension mismatch");
  }
  const JacobiPreconditioner jacobi(a);
  std::vector<double> r(n), z(n), p(n), q(n);
  a.residual(b, x, r);
  const double bnorm = norm2(b);
  KrylovResult result;
  if (bnorm == 0.0) {
    fill(x, 0.0);
    result.converged = true;
    return result;
  }
  double rnorm = norm2(r);
  if (rnorm <= rtol * bnorm) {
    result.converged = true;
    result.relative_residual = rnorm / bnorm;
    return result;
  }
  jacobi.apply(r, z);
  copy(z, p);
  double rz = dot(r, z);
  while (result.iterations < maxit) {
    a.multiply(p, q);
    const double alpha = rz / dot(p, q);
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    ++result.iterations;
    rnorm = norm2(r);
    if (rnorm <= rtol * bnorm) {
      result.converged = true;
      break;
    }
    jacobi.apply(r, z);
    const double rz_new = dot(r, z);
    xpby(z, rz_new / rz, p);
    rz = rz_new;
  }
  result.relative_residual = rnorm / bnorm;
  return result;
}

}  // namespace sttopo
