#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sttopo/design.hpp"
#include "sttopo/krylov.hpp"
#include "sttopo/mesh.hpp"
#include "sttopo/mma.hpp"
#include "sttopo/multigrid.hpp"
#include "sttopo/problem.hpp"

namespace sttopo {

struct HierarchyOptions {
  std::optional<int> num_levels;
  double lambda_crit = 0.5;
  CoarseningMode mode = CoarseningMode::Semi;
};

struct OptConfig {
  double p_norm = 20.0;
  double volume_fraction = 0.3;
  int max_iterations = 100;
  // Stop once the max-norm design change falls below this.
  double change_tolerance = 1e-4;
  // Off: constrain the raw design instead of the projected field.
  bool volume_on_physical = true;
  // Keep the design dependence of the artificial time diffusion.
  bool include_artificial_sensitivity = true;
  // Uniform starting density. Unset: the raw value whose projection equals
  // volume_fraction, so the first physical design has the target volume.
  std::optional<double> initial_density;
  MmaConfig mma;

  void validate() const;
};

// Element averages of a nodal field.
std::vector<double> element_average(std::span<const double> nodal, const SpaceTimeMesh& mesh);

struct ObjectiveValue {
  double phi = 0.0;
  std::vector<double> gradient;  // d phi / d s, per node
};

// p-norm of the element-averaged temperature.
ObjectiveValue objective(std::span<const double> s, const SpaceTimeMesh& mesh, double p_norm);

struct ConstraintValue {
  double chi = 0.0;
  std::vector<double> gradient;  // per element
};

// chi = sum_e gamma_e v_e / (v_f |Pi|) - 1 for an element field.
ConstraintValue volume_constraint(std::span<const double> gamma, const SpaceTimeMesh& mesh,
                                  double volume_fraction);

// d phi / d gamma_bar_e = -lambda_e^T dA_e/dgamma_bar_e s_e.
std::vector<double> sensitivities(std::span<const double> lambda, std::span<const double> s,
                                  std::span<const double> gamma_bar, const SpaceTimeMesh& mesh,
                                  const MaterialSet& materials, bool include_artificial = true);

// Assembled all-at-once system for one design with its multigrid solvers.
class ThermalModel {
 public:
  ThermalModel(const SpaceTimeMesh& mesh, const ProblemDefinition& problem,
               const MaterialSet& materials, const SolverConfig& solver,
               const HierarchyOptions& hierarchy = {});

  void set_design(std::span<const double> gamma_bar);

  // x is the warm start on entry.
  SolverStats solve_state(std::span<double> s) const;
  // rhs is zeroed on constrained nodes before solving J^T lambda = rhs.
  SolverStats solve_adjoint(std::span<const double> rhs, std::span<double> lambda) const;

  const SpaceTimeMesh& mesh() const noexcept { return mesh_; }
  const Hierarchy& hierarchy() const noexcept { return hierarchy_; }
  const SparseMatrix& system() const;
  std::span<const double> rhs() const noexcept { return rhs_; }
  std::span<const Index> dirichlet_nodes() const noexcept { return dirichlet_; }
  const MaterialSet& materials() const noexcept { return materials_; }
  const SolverConfig& solver_config() const noexcept { return solver_; }

 private:
  SpaceTimeMesh mesh_;
  ProblemDefinition problem_;
  MaterialSet materials_;
  SolverConfig solver_;
  Hierarchy hierarchy_;
  std::vector<Index> dirichlet_;
  std::vector<double> source_;
  std::vector<double> rhs_;
  std::unique_ptr<Multigrid> mg_;
  mutable std::unique_ptr<Multigrid> mg_transposed_;
};

struct OptimizationSetup {
  SpaceTimeMesh mesh{4, 4, 4};
  ProblemDefinition problem;
  MaterialSet materials;
  SolverConfig solver;
  FilterConfig filter;
  DesignMode design_mode = DesignMode::TimeConstant;
  HierarchyOptions hierarchy;
  OptConfig opt;

  void validate() const;
};

struct Evaluation {
  double phi = 0.0;
  double chi = 0.0;
  std::vector<double> dphi;  // per design variable
  std::vector<double> dchi;
  SolverStats state;
  SolverStats adjoint;
};

// Design -> objective/constraint map with warm-started state and adjoint.
class TopologyProblem {
 public:
  explicit TopologyProblem(OptimizationSetup setup);

  Index num_variables() const noexcept { return pipeline_.num_variables(); }
  std::vector<double> initial_design() const;
  // Throws SolverError if a state or adjoint solve does not converge.
  Evaluation evaluate(std::span<const double> gamma, bool with_gradient = true);

  const OptimizationSetup& setup() const noexcept { return setup_; }
  const DesignPipeline& pipeline() const noexcept { return pipeline_; }
  const ThermalModel& model() const noexcept { return model_; }
  std::span<const double> temperature() const noexcept { return state_; }
  std::span<const double> adjoint() const noexcept { return adjoint_; }
  void reset_warm_start();

 private:
  OptimizationSetup setup_;
  DesignPipeline pipeline_;
  ThermalModel model_;
  std::vector<double> state_;
  std::vector<double> adjoint_;
};

struct OptRecord {
  int iteration = 0;
  double phi = 0.0;
  double chi = 0.0;
  SolverStats state;
  SolverStats adjoint;
  // Max-norm change of the design that produced this record.
  double design_change = 0.0;
  double wall_seconds = 0.0;
};

struct OptResult {
  DesignState design;
  std::vector<double> temperature;
  std::vector<OptRecord> records;
  bool converged = false;
  // Set when a solve failed; records hold every completed iteration.
  std::optional<std::string> failure;
};

using RecordCallback = std::function<void(const OptRecord&)>;

OptResult optimize(const OptimizationSetup& setup, const RecordCallback& on_record = {});

struct GradientCheckResult {
  std::vector<Index> indices;
  std::vector<double> adjoint;
  std::vector<double> finite_difference;
  // max |adjoint - fd| / max(|adjoint|, |fd|) over the sampled variables
  double max_relative_error = 0.0;
};

// Central differences of phi on `samples` distinct random design variables.
// An empty design means uniform random values in [0, 1] drawn from `seed`.
GradientCheckResult gradient_check(const OptimizationSetup& setup, int samples, double step,
                                   std::uint64_t seed, std::span<const double> design = {});

}  // namespace sttopo
