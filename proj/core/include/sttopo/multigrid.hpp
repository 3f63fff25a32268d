#pragma once

#include <span>
#include <vector>

#include "sttopo/krylov.hpp"
#include "sttopo/mesh.hpp"
#include "sttopo/sparse.hpp"

namespace sttopo {

// Linear interpolation from the coarse to the fine nodal grid, applied only in
// the directions that were coarsened (non-causal in time). Restriction is P^T.
// Throws HierarchyError if the grids are not a parent/child pair.
SparseMatrix build_prolongation(const GridLevel& fine, const GridLevel& coarse);

// Space-time multigrid V-cycle with Jacobi-GMRES smoothing and coarse solve.
// Coarse operators are Galerkin products of the fine operator.
class Multigrid {
 public:
  Multigrid() = default;
  Multigrid(const Hierarchy& hierarchy, SparseMatrix fine, SolverConfig config);
  // Explicit prolongations, P[l] mapping level l+1 to level l.
  Multigrid(std::vector<SparseMatrix> prolongations, SparseMatrix fine, SolverConfig config);

  // Operators J_l^T on every level with the same transfers. Exact replacement
  // for rebuilding Galerkin products of J^T since (P^T J P)^T = P^T J^T P.
  Multigrid transposed() const;

  int num_levels() const noexcept { return static_cast<int>(operators_.size()); }
  const SparseMatrix& fine_operator() const { return operators_.front(); }
  const SparseMatrix& level_operator(int level) const;
  const SparseMatrix& prolongation(int level) const { return prolongations_.at(level); }
  const SolverConfig& config() const noexcept { return config_; }

  // z = V-cycle(level) applied to r with zero initial guess.
  void vcycle(int level, std::span<const double> r, std::span<double> z) const;
  void apply(std::span<const double> r, std::span<double> z) const { vcycle(0, r, z); }
  Preconditioner as_preconditioner() const;

  // Smoother/coarse GMRES iterations per level since the last reset.
  const std::vector<long>& level_iterations() const noexcept { return level_iterations_; }
  void reset_counters() const;

 private:
  void setup_levels();

  SolverConfig config_;
  std::vector<SparseMatrix> operators_;
  std::vector<SparseMatrix> prolongations_;
  std::vector<SparseMatrix> restrictions_;
  std::vector<JacobiPreconditioner> jacobi_;

  struct LevelScratch {
    std::vector<double> residual;
    std::vector<double> coarse_rhs;
    std::vector<double> coarse_correction;
    GmresWorkspace gmres;
  };
  mutable std::vector<LevelScratch> scratch_;
  mutable std::vector<long> level_iterations_;
};

// Solves A x = b with FGMRES preconditioned by one V-cycle per application.
// Per-level smoother counts are copied into the returned stats.
SolverStats solve_with_multigrid(const Multigrid& mg, std::span<const double> b,
                                 std::span<double> x);

}  // namespace sttopo
