#pragma once

#include <array>

namespace sttopo {

// Row-major 8x8 element matrix; local node a = i + 2 j + 4 k.
using ElementMatrix = std::array<double, 64>;
using ElementVector = std::array<double, 8>;

inline constexpr double& entry(ElementMatrix& m, int a, int b) { return m[a * 8 + b]; }
inline constexpr double entry(const ElementMatrix& m, int a, int b) { return m[a * 8 + b]; }

// Reference trilinear operators of one dx x dx x dt element, integrated with
// 2x2x2 Gauss quadrature (exact for all of them).
struct ElementOperatorSet {
  double dx = 0.0;
  double dt = 0.0;
  ElementMatrix time_convection{};     // int N_a dN_b/dt
  ElementMatrix spatial_diffusion{};   // int grad_x N_a . grad_x N_b
  ElementMatrix temporal_diffusion{};  // int dN_a/dt dN_b/dt
  ElementMatrix mass{};                // int N_a N_b
  ElementVector load{};                // int N_a
};

ElementOperatorSet reference_operators(double dx, double dt);

// Artificial time diffusivity giving a unit element Peclet number in time.
inline constexpr double artificial_diffusivity(double capacity, double dt) {
  return 0.5 * capacity * dt;
}

// C G_t + k K_xy + k_ad K_t with k_ad from artificial_diffusivity.
// Throws ConfigError for non-positive coefficients.
ElementMatrix element_matrix(const ElementOperatorSet& ops, double capacity, double conductivity);
ElementMatrix element_matrix(double capacity, double conductivity, double dx, double dt);

// Trilinear shape function values and reference-cube gradients at (s, r, q) in [0,1]^3.
struct ShapeEval {
  ElementVector value{};
  std::array<ElementVector, 3> grad{};
};
ShapeEval evaluate_shape(double s, double r, double q);

// 2-point Gauss abscissae on [0,1], each with weight 1/2.
inline constexpr std::array<double, 2> kGauss2 = {0.21132486540518711775, 0.78867513459481288225};

}  // namespace sttopo
