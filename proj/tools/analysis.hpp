#pragma once

#include <span>

#include "run_config.hpp"
#include "sttopo/timestepping.hpp"

namespace sttopo::cli {

struct ConsistencyReport {
  int steps = 0;
  // Relative L2 gap between the two final-time temperature fields.
  double relative_l2 = 0.0;
  double phi_space_time = 0.0;
  double phi_time_stepping = 0.0;
  SolverStats space_time;
  long time_stepping_iterations = 0;
  double space_time_seconds = 0.0;
  double time_stepping_seconds = 0.0;
};

// Space-time solve on the configured mesh against backward Euler on the same
// spatial grid, both at the uniform physical density `density`.
ConsistencyReport compare_ts(const RunConfig& config, double density, int steps);

// Fraction of elements with 0.05 < value < 0.95.
double discreteness(std::span<const double> gamma_bar);

// Mean cos(angle difference) between the per-slab centroid of the cells with
// gamma_bar >= 0.5 and the moving source, both seen from the domain centre.
// Slabs with no solid cells count as 0.
double orbit_tracking(const SpaceTimeMesh& mesh, const ProblemDefinition& problem,
                      std::span<const double> gamma_bar);

}  // namespace sttopo::cli
