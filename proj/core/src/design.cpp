#include "sttopo/design.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sttopo/assembly.hpp"
#include "sttopo/element.hpp"
#include "sttopo/error.hpp"
#include "sttopo/krylov.hpp"

namespace sttopo {

Interpolation interpolate(double density, const MaterialSet& m) {
  if (!(density >= 0.0 && density <= 1.0)) {
    std::ostringstream os;
    os << "density " << density << " outside [0, 1]";
    throw ConfigError(os.str());
  }
  const double kin = m.k_tilde_ins(), kcon = m.k_tilde_con();
  Interpolation r;
  r.capacity = m.c_ins + (m.c_con - m.c_ins) * std::pow(density, m.p_c);
  r.conductivity = kin + (kcon - kin) * std::pow(density, m.p_k);
  r.d_capacity = (m.c_con - m.c_ins) * m.p_c * std::pow(density, m.p_c - 1.0);
  r.d_conductivity = (kcon - kin) * m.p_k * std::pow(density, m.p_k - 1.0);
  return r;
}

FilterConfig FilterConfig::resolved(const SpaceTimeMesh& mesh) const {
  FilterConfig c = *this;
  if (!(c.r_x > 0.0)) c.r_x = 2.4 * mesh.dx();
  if (!(c.r_t > 0.0)) c.r_t = 2.4 * mesh.dt();
  return c;
}

void FilterConfig::validate() const {
  std::ostringstream os;
  if (!(r_x > 0.0 && r_t > 0.0)) os << "filter radii must be positive; ";
  if (!(beta > 0.0)) os << "beta must be positive; ";
  if (!(eta > 0.0 && eta < 1.0)) os << "eta must lie in (0, 1); ";
  if (!(rtol > 0.0 && rtol < 1.0)) os << "filter rtol must lie in (0, 1); ";
  if (max_iterations < 1) os << "filter max_iterations must be >= 1; ";
  if (!os.str().empty()) throw ConfigError("invalid filter: " + os.str());
}

DensityFilter::DensityFilter(const SpaceTimeMesh& mesh, const FilterConfig& config)
    : mesh_(mesh), config_(config.resolved(mesh)) {
  config_.validate();
  const ElementOperatorSet ops = reference_operators(mesh.dx(), mesh.dt());
  const double dxx = config_.r_x * config_.r_x / 12.0;
  const double dtt = config_.r_t * config_.r_t / 12.0;
  ElementMatrix fe{};
  for (int p = 0; p < 64; ++p) {
    fe[p] = dxx * ops.spatial_diffusion[p] + dtt * ops.temporal_diffusion[p] + ops.mass[p];
  }
  matrix_ = assemble_uniform(mesh, fe);
}

std::vector<double> DensityFilter::solve(std::span<const double> rhs) const {
  std::vector<double> u(rhs.size(), 0.0);
  const KrylovResult r =
      conjugate_gradient(matrix_, rhs, u, config_.rtol, config_.max_iterations);
  last_iterations_ = r.iterations;
  if (!r.converged) {
    std::ostringstream os;
    os << "filter solve did not converge in " << r.iterations << " iterations (rel. residual "
       << r.relative_residual << ")";
    throw SolverError(os.str());
  }
  return u;
}

std::vector<double> DensityFilter::average(std::span<const double> nodal) const {
  std::vector<double> out(static_cast<std::size_t>(mesh_.num_elements()));
  const Index ne = mesh_.num_elements();
#pragma omp parallel for schedule(static)
  for (Index e = 0; e < ne; ++e) {
    double s = 0.0;
    for (Index n : mesh_.element_nodes(e)) s += nodal[n];
    out[e] = 0.125 * s;
  }
  return out;
}

std::vector<double> DensityFilter::apply(std::span<const double> gamma) const {
  if (static_cast<Index>(gamma.size()) != mesh_.num_elements()) {
    throw DimensionError("filter input must have one value per element");
  }
  return average(solve(assemble_element_load(mesh_, gamma)));
}

std::vector<double> DensityFilter::apply_transpose(std::span<const double> g) const {
  if (static_cast<Index>(g.size()) != mesh_.num_elements()) {
    throw DimensionError("filter input must have one value per element");
  }
  // Averaging transpose: node a collects g_e / 8 from its elements.
  std::vector<double> w = assemble_element_load(mesh_, g);
  const double inv_v = 1.0 / mesh_.element_volume();
  for (double& x : w) x *= inv_v;
  const std::vector<double> z = solve(w);
  // Load-map transpose: element e collects v_e / 8 * sum of its nodal values.
  std::vector<double> out = average(z);
  const double v = mesh_.element_volume();
  for (double& x : out) x *= v;
  return out;
}

Projection project(double x, double beta, double eta) {
  const double denom = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  const double th = std::tanh(beta * (x - eta));
  return {(std::tanh(beta * eta) + th) / denom, beta * (1.0 - th * th) / denom};
}

std::vector<double> Extrusion::extrude(std::span<const double> reduced) const {
  if (static_cast<Index>(reduced.size()) != num_reduced()) {
    throw DimensionError("extrusion input must have one value per spatial element");
  }
  const Index ns = num_reduced();
  std::vector<double> full(static_cast<std::size_t>(num_full()));
  for (int k = 0; k < mesh_.nt(); ++k) {
    std::copy(reduced.begin(), reduced.end(), full.begin() + k * ns);
  }
  return full;
}

std::vector<double> Extrusion::reduce(std::span<const double> full) const {
  if (static_cast<Index>(full.size()) != num_full()) {
    throw DimensionError("extrusion transpose input must have one value per element");
  }
  const Index ns = num_reduced();
  std::vector<double> out(static_cast<std::size_t>(ns), 0.0);
  for (int k = 0; k < mesh_.nt(); ++k) {
    for (Index s = 0; s < ns; ++s) out[s] += full[k * ns + s];
  }
  return out;
}

SparseMatrix Extrusion::matrix() const {
  const Index ns = num_reduced();
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(num_full()) + 1);
  std::vector<std::int32_t> idx(static_cast<std::size_t>(num_full()));
  for (Index e = 0; e < num_full(); ++e) {
    ptr[e + 1] = e + 1;
    idx[e] = static_cast<std::int32_t>(e % ns);
  }
  return SparseMatrix(num_full(), ns, std::move(ptr), std::move(idx),
                      std::vector<double>(idx.size(), 1.0));
}

std::string to_string(DesignMode mode) {
  return mode == DesignMode::TimeConstant ? "time-constant" : "space-time";
}

DesignMode parse_design_mode(const std::string& name) {
  if (name == "time-constant") return DesignMode::TimeConstant;
  if (name == "space-time") return DesignMode::SpaceTime;
  throw ConfigError("unknown design mode '" + name + "' (time-constant | space-time)");
}

DesignPipeline::DesignPipeline(const SpaceTimeMesh& mesh, const FilterConfig& config,
                               DesignMode mode)
    : mesh_(mesh), mode_(mode), filter_(mesh, config), extrusion_(mesh) {
  state_.mode = mode;
}

Index DesignPipeline::num_variables() const noexcept {
  return mode_ == DesignMode::TimeConstant ? extrusion_.num_reduced() : mesh_.num_elements();
}

const DesignState& DesignPipeline::forward(std::span<const double> gamma) {
  valid_ = false;
  if (static_cast<Index>(gamma.size()) != num_variables()) {
    std::ostringstream os;
    os << "design has " << gamma.size() << " variables, expected " << num_variables() << " ("
       << to_string(mode_) << ")";
    throw DimensionError(os.str());
  }
  for (double g : gamma) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("design variables must lie in [0, 1]");
  }
  state_.gamma.assign(gamma.begin(), gamma.end());
  state_.gamma_full = mode_ == DesignMode::TimeConstant
                          ? extrusion_.extrude(gamma)
                          : std::vector<double>(gamma.begin(), gamma.end());
  state_.gamma_tilde = filter_.apply(state_.gamma_full);
  const std::size_t ne = state_.gamma_tilde.size();
  state_.gamma_bar.resize(ne);
  projection_derivative_.resize(ne);
  const double beta = filter_.config().beta, eta = filter_.config().eta;
  for (std::size_t e = 0; e < ne; ++e) {
    const Projection p = project(state_.gamma_tilde[e], beta, eta);
    // The filter may overshoot [0, 1] slightly; clamped entries are flat.
    const double v = std::clamp(p.value, 0.0, 1.0);
    state_.gamma_bar[e] = v;
    projection_derivative_[e] = v == p.value ? p.derivative : 0.0;
  }
  valid_ = true;
  return state_;
}

const DesignState& DesignPipeline::state() const {
  if (!valid_) throw ConfigError("design pipeline has no current state");
  return state_;
}

std::vector<double> DesignPipeline::linear_backward(std::span<const double> d_full) const {
  return reduce(filter_.apply_transpose(d_full));
}

std::vector<double> DesignPipeline::reduce(std::span<const double> d_full) const {
  if (mode_ == DesignMode::TimeConstant) return extrusion_.reduce(d_full);
  return std::vector<double>(d_full.begin(), d_full.end());
}

std::vector<double> DesignPipeline::chain_rule_backward(std::span<const double> d_bar) const {
  if (!valid_) throw ConfigError("chain rule requested on a stale design cache");
  if (d_bar.size() != projection_derivative_.size()) {
    throw DimensionError("sensitivity must have one value per element");
  }
  std::vector<double> g(d_bar.size());
  for (std::size_t e = 0; e < g.size(); ++e) g[e] = d_bar[e] * projection_derivative_[e];
  return linear_backward(g);
}

}  // namespace sttopo
