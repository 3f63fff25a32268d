#include "sttopo/element.hpp"

#include "sttopo/error.hpp"

namespace sttopo {

ShapeEval evaluate_shape(double s, double r, double q) {
  ShapeEval e;
  const double fx[2] = {1.0 - s, s};
  const double fy[2] = {1.0 - r, r};
  const double ft[2] = {1.0 - q, q};
  const double dfd[2] = {-1.0, 1.0};
  for (int a = 0; a < 8; ++a) {
    const int i = a & 1, j = (a >> 1) & 1, k = (a >> 2) & 1;
    e.value[a] = fx[i] * fy[j] * ft[k];
    e.grad[0][a] = dfd[i] * fy[j] * ft[k];
    e.grad[1][a] = fx[i] * dfd[j] * ft[k];
    e.grad[2][a] = fx[i] * fy[j] * dfd[k];
  }
  return e;
}

ElementOperatorSet reference_operators(double dx, double dt) {
  if (!(dx > 0.0 && dt > 0.0)) throw ConfigError("element sizes must be positive");
  ElementOperatorSet ops;
  ops.dx = dx;
  ops.dt = dt;
  const double jac = dx * dx * dt;
  for (double q : kGauss2) {
    for (double r : kGauss2) {
      for (double s : kGauss2) {
        const ShapeEval sh = evaluate_shape(s, r, q);
        const double w = 0.125 * jac;
        for (int a = 0; a < 8; ++a) {
          ops.load[a] += w * sh.value[a];
          for (int b = 0; b < 8; ++b) {
            const double gx = sh.grad[0][a] * sh.grad[0][b] + sh.grad[1][a] * sh.grad[1][b];
            entry(ops.spatial_diffusion, a, b) += w * gx / (dx * dx);
            entry(ops.temporal_diffusion, a, b) += w * sh.grad[2][a] * sh.grad[2][b] / (dt * dt);
            entry(ops.time_convection, a, b) += w * sh.value[a] * sh.grad[2][b] / dt;
            entry(ops.mass, a, b) += w * sh.value[a] * sh.value[b];
          }
        }
      }
    }
  }
  return ops;
}

ElementMatrix element_matrix(const ElementOperatorSet& ops, double capacity,
                             double conductivity) {
  if (!(capacity > 0.0 && conductivity > 0.0)) {
    throw ConfigError("element capacity and conductivity must be positive");
  }
  const double k_ad = artificial_diffusivity(capacity, ops.dt);
  ElementMatrix m{};
  for (int p = 0; p < 64; ++p) {
    m[p] = capacity * ops.time_convection[p] + conductivity * ops.spatial_diffusion[p] +
           k_ad * ops.temporal_diffusion[p];
  }
  return m;
}

ElementMatrix element_matrix(double capacity, double conductivity, double dx, double dt) {
  return element_matrix(reference_operators(dx, dt), capacity, conductivity);
}

}  // namespace sttopo
