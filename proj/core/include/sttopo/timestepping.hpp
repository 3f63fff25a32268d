#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sttopo/mesh.hpp"
#include "sttopo/problem.hpp"

namespace sttopo {

struct TimeSteppingConfig {
  int nx1 = 32;
  int nx2 = 32;
  int n_steps = 64;
  ProblemDefinition problem;
  MaterialSet materials;
  double p_norm = 20.0;
  double rtol = 1e-10;
  int max_iterations = 20000;
  // Off drops the boundary heat sink/walls (T = 0 at t = 0 still holds).
  bool boundary_conditions = true;

  void validate() const;
};

struct TimeSteppingResult {
  std::vector<double> final_temperature;  // spatial nodes at t = 1
  double phi = 0.0;
  long linear_iterations = 0;
  double wall_seconds = 0.0;
};

// Called after every step with the step index (1..n_steps), the rescaled time
// and the nodal temperature.
using SliceCallback = std::function<void(int, double, std::span<const double>)>;

// Backward Euler on bilinear quads with consistent mass. The history is not
// stored; phi accumulates the same p-norm as the space-time objective over
// (element, step) averages of the 8 surrounding nodal values.
TimeSteppingResult ts_forward(const TimeSteppingConfig& config,
                              std::span<const double> gamma_bar_spatial,
                              const SliceCallback& on_step = {});

struct DiffusionDiagnostics {
  double tau_diff_con = 0.0;
  double tau_diff_ins = 0.0;
  double fourier_con = 0.0;
  double fourier_ins = 0.0;
};

// tau_diff = C L^2 / k (physical k); Fo_e = k_tilde dt / (C dx^2).
DiffusionDiagnostics diffusion_diagnostics(const MaterialSet& materials, double length, double dx,
                                           double dt);

}  // namespace sttopo
