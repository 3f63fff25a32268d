#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sttopo/sparse.hpp"

namespace sttopo {

struct SolverConfig {
  double outer_rtol = 1e-5;
  double smoother_rtol = 1e-6;
  int smoother_maxit = 10;
  int coarse_maxit = 200;
  int outer_maxit = 200;
  int restart = 200;

  void validate() const;
};

enum class SolveStatus { Converged, MaxIterations, Breakdown };

std::string to_string(SolveStatus status);

struct SolverStats {
  SolveStatus status = SolveStatus::MaxIterations;
  int outer_iterations = 0;
  // Smoother/coarse GMRES iterations accumulated per multigrid level.
  std::vector<long> level_iterations;
  double initial_residual = 0.0;
  double final_relative_residual = 0.0;
  // Arnoldi residual estimates, one per outer iteration (index 0 = start).
  std::vector<double> residual_history;
  double wall_seconds = 0.0;

  bool converged() const noexcept { return status == SolveStatus::Converged; }
};

class JacobiPreconditioner {
 public:
  JacobiPreconditioner() = default;
  // Throws SolverError on a zero diagonal entry.
  explicit JacobiPreconditioner(const SparseMatrix& a);

  void apply(std::span<const double> r, std::span<double> z) const;
  std::span<const double> inverse_diagonal() const noexcept { return inv_diag_; }

 private:
  std::vector<double> inv_diag_;
};

struct KrylovResult {
  int iterations = 0;
  bool converged = false;
  // Relative to the initial (preconditioned) residual.
  double relative_residual = 0.0;
};

// Scratch storage reused across calls so smoothers do not allocate per sweep.
struct GmresWorkspace {
  std::vector<std::vector<double>> basis;
  std::vector<double> w;
  std::vector<double> hessenberg;
  std::vector<double> g, cs, sn, y;
};

// Left Jacobi-preconditioned restarted GMRES. Convergence is measured on the
// preconditioned residual relative to its value at x0. x holds x0 on entry and
// the last iterate on exit.
KrylovResult gmres(const SparseMatrix& a, const JacobiPreconditioner& jacobi,
                   std::span<const double> b, std::span<double> x, double rtol, int maxit,
                   int restart = 0, GmresWorkspace* workspace = nullptr);

using Preconditioner = std::function<void(std::span<const double>, std::span<double>)>;

// Right-preconditioned flexible GMRES. The stopping test is on the true
// residual: ||b - A x|| <= rtol ||b||. x is used as the warm start.
SolverStats fgmres(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                   const Preconditioner& preconditioner, const SolverConfig& config);

// Jacobi-preconditioned conjugate gradients for SPD systems; relative to ||b||.
KrylovResult conjugate_gradient(const SparseMatrix& a, std::span<const double> b,
                                std::span<double> x, double rtol, int maxit);

}  // namespace sttopo
