#pragma once

#include <span>
#include <string>
#include <vector>

#include "sttopo/mesh.hpp"
#include "sttopo/sparse.hpp"

namespace sttopo {

struct Interpolation {
  double capacity = 0.0;
  double conductivity = 0.0;  // rescaled
  double d_capacity = 0.0;
  double d_conductivity = 0.0;
};

// Modified SIMP. Throws ConfigError for densities outside [0, 1].
Interpolation interpolate(double density, const MaterialSet& materials);

struct FilterConfig {
  // Radii in rescaled units; non-positive values mean 2.4 element sizes.
  double r_x = 0.0;
  double r_t = 0.0;
  double beta = 32.0;
  double eta = 0.5;
  double rtol = 1e-8;
  int max_iterations = 10000;

  // Radii resolved against a mesh.
  FilterConfig resolved(const SpaceTimeMesh& mesh) const;
  void validate() const;
};

// Reaction-diffusion filter with homogeneous Neumann conditions. Element
// fields enter through int N_a dV weighting and leave as 8-node averages.
class DensityFilter {
 public:
  DensityFilter(const SpaceTimeMesh& mesh, const FilterConfig& config);

  std::vector<double> apply(std::span<const double> gamma) const;
  // Exact adjoint of apply().
  std::vector<double> apply_transpose(std::span<const double> g) const;

  const SparseMatrix& matrix() const noexcept { return matrix_; }
  const FilterConfig& config() const noexcept { return config_; }
  int last_iterations() const noexcept { return last_iterations_; }

 private:
  std::vector<double> solve(std::span<const double> rhs) const;
  std::vector<double> average(std::span<const double> nodal) const;

  SpaceTimeMesh mesh_;
  FilterConfig config_;
  SparseMatrix matrix_;
  mutable int last_iterations_ = 0;
};

struct Projection {
  double value = 0.0;
  double derivative = 0.0;
};

Projection project(double filtered, double beta, double eta);

// Maps spatial design variables onto every time slab; reduce() is E^T.
class Extrusion {
 public:
  explicit Extrusion(const SpaceTimeMesh& mesh) : mesh_(mesh) {}

  Index num_reduced() const noexcept { return mesh_.num_spatial_elements(); }
  Index num_full() const noexcept { return mesh_.num_elements(); }

  std::vector<double> extrude(std::span<const double> reduced) const;
  std::vector<double> reduce(std::span<const double> full) const;
  SparseMatrix matrix() const;

 private:
  SpaceTimeMesh mesh_;
};

enum class DesignMode { TimeConstant, SpaceTime };
std::string to_string(DesignMode mode);
DesignMode parse_design_mode(const std::string& name);

struct DesignState {
  DesignMode mode = DesignMode::TimeConstant;
  std::vector<double> gamma;        // optimization variables
  std::vector<double> gamma_full;   // per element (extruded in time-constant mode)
  std::vector<double> gamma_tilde;  // filtered
  std::vector<double> gamma_bar;    // projected
};

// gamma -> extrusion -> filter -> projection, with the reverse chain rule.
class DesignPipeline {
 public:
  DesignPipeline(const SpaceTimeMesh& mesh, const FilterConfig& config, DesignMode mode);

  DesignMode mode() const noexcept { return mode_; }
  Index num_variables() const noexcept;
  const SpaceTimeMesh& mesh() const noexcept { return mesh_; }
  const DensityFilter& filter() const noexcept { return filter_; }
  const Extrusion& extrusion() const noexcept { return extrusion_; }

  // Throws DimensionError on a wrong length and ConfigError outside [0, 1].
  const DesignState& forward(std::span<const double> gamma);
  const DesignState& state() const;
  bool has_state() const noexcept { return valid_; }

  // dphi/dgamma from dphi/dgamma_bar at the cached state. Throws ConfigError
  // when no forward pass has been made since the last invalidate().
  std::vector<double> chain_rule_backward(std::span<const double> d_gamma_bar) const;
  // dphi/dgamma from dphi/dgamma_tilde.
  std::vector<double> linear_backward(std::span<const double> d_gamma_tilde) const;
  // dphi/dgamma from dphi/dgamma_full (extrusion transpose only).
  std::vector<double> reduce(std::span<const double> d_gamma_full) const;

  void invalidate() noexcept { valid_ = false; }

 private:
  SpaceTimeMesh mesh_;
  DesignMode mode_;
  DensityFilter filter_;
  Extrusion extrusion_;
  DesignState state_;
  std::vector<double> projection_derivative_;
  bool valid_ = false;
};

}  // namespace sttopo
