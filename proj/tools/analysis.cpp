#include "analysis.hpp"

#include <chrono>
#include <cmath>

#include "sttopo/error.hpp"

namespace sttopo::cli {

ConsistencyReport compare_ts(const RunConfig& config, double density, int steps) {
  validate(config);
  if (!(density >= 0.0 && density <= 1.0)) throw ConfigError("density must lie in [0, 1]");
  const OptimizationSetup setup = make_setup(config);
  const SpaceTimeMesh& mesh = setup.mesh;
  ConsistencyReport rep;
  rep.steps = steps > 0 ? steps : mesh.nt();

  auto t0 = std::chrono::steady_clock::now();
  ThermalModel model(mesh, setup.problem, setup.materials, setup.solver, setup.hierarchy);
  model.set_design(std::vector<double>(static_cast<std::size_t>(mesh.num_elements()), density));
  std::vector<double> s(static_cast<std::size_t>(mesh.num_nodes()), 0.0);
  rep.space_time = model.solve_state(s);
  if (!rep.space_time.converged()) throw SolverError("space-time state solve did not converge");
  rep.phi_space_time = objective(s, mesh, setup.opt.p_norm).phi;
  rep.space_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  TimeSteppingConfig ts;
  ts.nx1 = mesh.nx();
  ts.nx2 = mesh.ny();
  ts.n_steps = rep.steps;
  ts.problem = setup.problem;
  ts.materials = setup.materials;
  ts.p_norm = setup.opt.p_norm;
  const TimeSteppingResult r =
      ts_forward(ts, std::vector<double>(static_cast<std::size_t>(mesh.nx()) * mesh.ny(), density));
  rep.phi_time_stepping = r.phi;
  rep.time_stepping_iterations = r.linear_iterations;
  rep.time_stepping_seconds = r.wall_seconds;

  const std::size_t slab = static_cast<std::size_t>(mesh.nx() + 1) * (mesh.ny() + 1);
  const std::span<const double> last(s.data() + static_cast<std::size_t>(mesh.nt()) * slab, slab);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < slab; ++i) {
    num += (last[i] - r.final_temperature[i]) * (last[i] - r.final_temperature[i]);
    den += r.final_temperature[i] * r.final_temperature[i];
  }
  rep.relative_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return rep;
}

double discreteness(std::span<const double> g) {
  if (g.empty()) return 0.0;
  std::size_t grey = 0;
  for (double v : g) grey += (v > 0.05 && v < 0.95) ? 1 : 0;
  return static_cast<double>(grey) / static_cast<double>(g.size());
}

double orbit_tracking(const SpaceTimeMesh& mesh, const ProblemDefinition& problem,
                      std::span<const double> g) {
  if (static_cast<Index>(g.size()) != mesh.num_elements()) {
    throw DimensionError("orbit tracking needs one density per element");
  }
  const Index per_slab = Index{mesh.nx()} * mesh.ny();
  double total = 0.0;
  for (int k = 0; k < mesh.nt(); ++k) {
    double sx = 0.0, sy = 0.0;
    long count = 0;
    for (int j = 0; j < mesh.ny(); ++j) {
      for (int i = 0; i < mesh.nx(); ++i) {
        if (g[k * per_slab + j * mesh.nx() + i] < 0.5) continue;
        sx += (i + 0.5) * mesh.dx();
        sy += (j + 0.5) * mesh.dx();
        ++count;
      }
    }
    if (count == 0) continue;
    const double cx = sx / count - 0.5, cy = sy / count - 0.5;
    const SourceCentre src = source_centre(problem, (k + 0.5) * mesh.dt());
    const double a = std::atan2(cy, cx), b = std::atan2(src.x2 - 0.5, src.x1 - 0.5);
    total += std::cos(a - b);
  }
  return total / mesh.nt();
}

}  // namespace sttopo::cli
