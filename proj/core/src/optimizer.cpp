#include "sttopo/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sttopo/assembly.hpp"
#include "sttopo/element.hpp"
#include "sttopo/error.hpp"

namespace sttopo {

void OptConfig::validate() const {
  std::ostringstream os;
  if (!(p_norm >= 1.0)) os << "P must be >= 1; ";
  if (!(volume_fraction > 0.0 && volume_fraction < 1.0)) os << "v_f must lie in (0, 1); ";
  if (max_iterations < 0) os << "max_iterations must be >= 0; ";
  if (!(change_tolerance >= 0.0)) os << "change_tolerance must be >= 0; ";
  if (initial_density && !(*initial_density >= 0.0 && *initial_density <= 1.0)) {
    os << "initial_density must lie in [0, 1]; ";
  }
  if (!os.str().empty()) throw ConfigError("invalid optimizer settings: " + os.str());
  mma.validate();
}

std::vector<double> element_average(std::span<const double> nodal, const SpaceTimeMesh& mesh) {
  if (static_cast<Index>(nodal.size()) != mesh.num_nodes()) {
    throw DimensionError("nodal field must have N_n entries");
  }
  const Index ne = mesh.num_elements();
  std::vector<double> avg(static_cast<std::size_t>(ne));
#pragma omp parallel for schedule(static)
  for (Index e = 0; e < ne; ++e) {
    double s = 0.0;
    for (Index n : mesh.element_nodes(e)) s += nodal[n];
    avg[e] = 0.125 * s;
  }
  return avg;
}

ObjectiveValue objective(std::span<const double> s, const SpaceTimeMesh& mesh, double p) {
  const std::vector<double> avg = element_average(s, mesh);
  const bool integer_p = p == std::floor(p);
  double m = 0.0;
  for (double t : avg) {
    if (t < 0.0 && !integer_p) {
      throw ConfigError("negative element temperature with a non-integer p-norm exponent");
    }
    m = std::max(m, std::abs(t));
  }
  ObjectiveValue out;
  out.gradient.assign(s.size(), 0.0);
  if (m == 0.0) return out;
  // Scaled by the largest magnitude so T^P cannot overflow.
  double theta = 0.0;
  for (double t : avg) theta += std::pow(t / m, p);
  out.phi = m * std::pow(theta, 1.0 / p);
  for (std::size_t e = 0; e < avg.size(); ++e) {
    const double g = 0.125 * std::pow(avg[e] / out.phi, p - 1.0);
    if (g == 0.0) continue;
    for (Index n : mesh.element_nodes(static_cast<Index>(e))) out.gradient[n] += g;
  }
  return out;
}

ConstraintValue volume_constraint(std::span<const double> gamma, const SpaceTimeMesh& mesh,
                                  double vf) {
  if (static_cast<Index>(gamma.size()) != mesh.num_elements()) {
    throw DimensionError("volume constraint needs one density per element");
  }
  const double v = mesh.element_volume();
  const double total = v * static_cast<double>(mesh.num_elements());
  const double w = v / (vf * total);
  ConstraintValue c;
  double sum = 0.0;
  for (double g : gamma) sum += g;
  c.chi = w * sum - 1.0;
  c.gradient.assign(gamma.size(), w);
  return c;
}

std::vector<double> sensitivities(std::span<const double> lambda, std::span<const double> s,
                                  std::span<const double> gamma_bar, const SpaceTimeMesh& mesh,
                                  const MaterialSet& materials, bool include_artificial) {
  const auto nn = static_cast<std::size_t>(mesh.num_nodes());
  const Index ne = mesh.num_elements();
  if (lambda.size() != nn || s.size() != nn || static_cast<Index>(gamma_bar.size()) != ne) {
    throw DimensionError("sensitivity inputs have inconsistent sizes");
  }
  const ElementOperatorSet ops = reference_operators(mesh.dx(), mesh.dt());
  const double half_dt = 0.5 * mesh.dt();
  std::vector<double> out(static_cast<std::size_t>(ne));
#pragma omp parallel for schedule(static)
  for (Index e = 0; e < ne; ++e) {
    const auto nodes = mesh.element_nodes(e);
    double le[8], se[8];
    for (int a = 0; a < 8; ++a) {
      le[a] = lambda[nodes[a]];
      se[a] = s[nodes[a]];
    }
    double gt = 0.0, kxy = 0.0, kt = 0.0;
    for (int a = 0; a < 8; ++a) {
      if (le[a] == 0.0) continue;
      double rg = 0.0, rk = 0.0, rt = 0.0;
      for (int b = 0; b < 8; ++b) {
        rg += entry(ops.time_convection, a, b) * se[b];
        rk += entry(ops.spatial_diffusion, a, b) * se[b];
        rt += entry(ops.temporal_diffusion, a, b) * se[b];
      }
      gt += le[a] * rg;
      kxy += le[a] * rk;
      kt += le[a] * rt;
    }
    const Interpolation ip = interpolate(gamma_bar[e], materials);
    double d = ip.d_capacity * gt + ip.d_conductivity * kxy;
    if (include_artificial) d += ip.d_capacity * half_dt * kt;
    out[e] = -d;
  }
  return out;
}

ThermalModel::ThermalModel(const SpaceTimeMesh& mesh, const ProblemDefinition& problem,
                           const MaterialSet& materials, const SolverConfig& solver,
                           const HierarchyOptions& hierarchy)
    : mesh_(mesh), problem_(problem), materials_(materials), solver_(solver) {
  materials_.validate();
  problem_.validate();
  solver_.validate();
  hierarchy_ = build_hierarchy(mesh_, materials_, hierarchy.num_levels, hierarchy.lambda_crit,
                               hierarchy.mode);
  dirichlet_ = dirichlet_set(mesh_, problem_);
  source_ = assemble_source(mesh_, problem_);
}

void ThermalModel::set_design(std::span<const double> gamma_bar) {
  const auto ne = static_cast<std::size_t>(mesh_.num_elements());
  if (gamma_bar.size() != ne) throw DimensionError("design must have one density per element");
  std::vector<double> c(ne), k(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const Interpolation ip = interpolate(gamma_bar[e], materials_);
    c[e] = ip.capacity;
    k[e] = ip.conductivity;
  }
  mg_transposed_.reset();
  mg_.reset();
  SparseMatrix j = assemble_system(mesh_, c, k);
  rhs_ = source_;
  apply_dirichlet(j, rhs_, dirichlet_);
  mg_ = std::make_unique<Multigrid>(hierarchy_, std::move(j), solver_);
}

const SparseMatrix& ThermalModel::system() const {
  if (!mg_) throw ConfigError("thermal model has no design");
  return mg_->fine_operator();
}

SolverStats ThermalModel::solve_state(std::span<double> s) const {
  if (!mg_) throw ConfigError("thermal model has no design");
  const SolverStats st = solve_with_multigrid(*mg_, rhs_, s);
  // Identity rows: the Krylov update leaves round-off there.
  for (Index n : dirichlet_) s[n] = rhs_[n];
  return st;
}

SolverStats ThermalModel::solve_adjoint(std::span<const double> rhs,
                                        std::span<double> lambda) const {
  if (!mg_) throw ConfigError("thermal model has no design");
  if (!mg_transposed_) mg_transposed_ = std::make_unique<Multigrid>(mg_->transposed());
  std::vector<double> b(rhs.begin(), rhs.end());
  zero_constrained(b, dirichlet_);
  const SolverStats st = solve_with_multigrid(*mg_transposed_, b, lambda);
  for (Index n : dirichlet_) lambda[n] = 0.0;
  return st;
}

void OptimizationSetup::validate() const {
  materials.validate();
  problem.validate();
  solver.validate();
  filter.resolved(mesh).validate();
  opt.validate();
}

TopologyProblem::TopologyProblem(OptimizationSetup setup)
    : setup_(std::move(setup)),
      pipeline_(setup_.mesh, setup_.filter, setup_.design_mode),
      model_(setup_.mesh, setup_.problem, setup_.materials, setup_.solver, setup_.hierarchy) {
  setup_.validate();
  reset_warm_start();
}

std::vector<double> TopologyProblem::initial_design() const {
  double g0;
  if (setup_.opt.initial_density) {
    g0 = *setup_.opt.initial_density;
  } else {
    // Invert the projection; filtering leaves a uniform field unchanged.
    const double b = setup_.filter.beta, eta = setup_.filter.eta;
    const double te = std::tanh(b * eta), t1 = std::tanh(b * (1.0 - eta));
    const double arg = setup_.opt.volume_fraction * (te + t1) - te;
    g0 = std::clamp(eta + std::atanh(arg) / b, 0.0, 1.0);
  }
  return std::vector<double>(static_cast<std::size_t>(num_variables()), g0);
}

void TopologyProblem::reset_warm_start() {
  state_.assign(static_cast<std::size_t>(setup_.mesh.num_nodes()), 0.0);
  adjoint_.assign(state_.size(), 0.0);
}

namespace {

void require_converged(const SolverStats& stats, const char* what) {
  if (stats.converged()) return;
  std::ostringstream os;
  os << what << " solve " << to_string(stats.status) << " after " << stats.outer_iterations
     << " iterations (relative residual " << stats.final_relative_residual << ")";
  throw SolverError(os.str());
}

}  // namespace

Evaluation TopologyProblem::evaluate(std::span<const double> gamma, bool with_gradient) {
  const DesignState& ds = pipeline_.forward(gamma);
  model_.set_design(ds.gamma_bar);
  Evaluation ev;
  ev.state = model_.solve_state(state_);
  require_converged(ev.state, "state");

  const ObjectiveValue obj = objective(state_, setup_.mesh, setup_.opt.p_norm);
  ev.phi = obj.phi;
  const bool physical = setup_.opt.volume_on_physical;
  const ConstraintValue con = volume_constraint(physical ? ds.gamma_bar : ds.gamma_full,
                                                setup_.mesh, setup_.opt.volume_fraction);
  ev.chi = con.chi;
  if (!with_gradient) return ev;

  ev.adjoint = model_.solve_adjoint(obj.gradient, adjoint_);
  require_converged(ev.adjoint, "adjoint");
  const std::vector<double> d_bar =
      sensitivities(adjoint_, state_, ds.gamma_bar, setup_.mesh, setup_.materials,
                    setup_.opt.include_artificial_sensitivity);
  ev.dphi = pipeline_.chain_rule_backward(d_bar);
  ev.dchi = physical ? pipeline_.chain_rule_backward(con.gradient)
                     : pipeline_.reduce(con.gradient);
  return ev;
}

OptResult optimize(const OptimizationSetup& setup, const RecordCallback& on_record) {
  TopologyProblem tp(setup);
  Mma mma(static_cast<std::size_t>(tp.num_variables()), setup.opt.mma);
  std::vector<double> gamma = tp.initial_design();
  OptResult result;
  double change = 0.0;
  const int max_it = setup.opt.max_iterations;
  for (int it = 0;; ++it) {
    const auto start = std::chrono::steady_clock::now();
    const bool last = it == max_it || (it > 0 && change < setup.opt.change_tolerance);
    Evaluation ev;
    try {
      ev = tp.evaluate(gamma);
    } catch (const SolverError& err) {
      result.failure = err.what();
      break;
    }
    OptRecord rec;
    rec.iteration = it;
    rec.phi = ev.phi;
    rec.chi = ev.chi;
    rec.state = ev.state;
    rec.adjoint = ev.adjoint;
    rec.design_change = change;
    if (!last) {
      std::vector<double> next = mma.update(gamma, ev.dphi, ev.chi, ev.dchi);
      change = 0.0;
      for (std::size_t j = 0; j < next.size(); ++j) {
        change = std::max(change, std::abs(next[j] - gamma[j]));
      }
      gamma = std::move(next);
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.records.push_back(rec);
    if (on_record) on_record(rec);
    if (last) {
      result.converged = it < max_it;
      break;
    }
  }
  if (tp.pipeline().has_state()) result.design = tp.pipeline().state();
  result.temperature.assign(tp.temperature().begin(), tp.temperature().end());
  return result;
}

GradientCheckResult gradient_check(const OptimizationSetup& setup, int samples, double step,
                                   std::uint64_t seed, std::span<const double> design) {
  if (samples < 1 || !(step > 0.0)) throw ConfigError("gradient check needs samples >= 1, step > 0");
  TopologyProblem tp(setup);
  const auto n = static_cast<std::size_t>(tp.num_variables());
  std::mt19937_64 rng(seed);
  std::vector<double> gamma(design.begin(), design.end());
  if (gamma.empty()) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    gamma.resize(n);
    for (double& g : gamma) g = u(rng);
  }
  if (gamma.size() != n) throw DimensionError("gradient check design has the wrong length");

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  // Keep perturbations inside [0, 1].
  std::erase_if(order, [&](Index j) { return gamma[j] < step || gamma[j] > 1.0 - step; });
  order.resize(std::min(order.size(), static_cast<std::size_t>(samples)));

  const Evaluation base = tp.evaluate(gamma);
  GradientCheckResult out;
  for (Index j : order) {
    std::vector<double> g = gamma;
    g[j] = gamma[j] + step;
    const double plus = tp.evaluate(g, false).phi;
    g[j] = gamma[j] - step;
    const double minus = tp.evaluate(g, false).phi;
    const double fd = (plus - minus) / (2.0 * step);
    const double adj = base.dphi[j];
    out.indices.push_back(j);
    out.adjoint.push_back(adj);
    out.finite_difference.push_back(fd);
    const double scale = std::max(std::abs(adj), std::abs(fd));
    const double rel = scale > 0.0 ? std::abs(adj - fd) / scale : 0.0;
    out.max_relative_error = std::max(out.max_relative_error, rel);
  }
  return out;
}

}  // namespace sttopo
