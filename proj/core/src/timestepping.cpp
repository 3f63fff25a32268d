#include "sttopo/timestepping.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <sstream>

#include "sttopo/design.hpp"
#include "sttopo/element.hpp"
#include "sttopo/error.hpp"
#include "sttopo/krylov.hpp"
#include "sttopo/sparse.hpp"

namespace sttopo {

void TimeSteppingConfig::validate() const {
  std::ostringstream os;
  if (nx1 < 2 || nx2 < 2) os << "spatial element counts must be >= 2; ";
  if (nx1 != nx2) os << "spatial mesh must be square; ";
  if (n_steps < 1) os << "n_steps must be >= 1; ";
  if (!(p_norm >= 1.0)) os << "P must be >= 1; ";
  if (!(rtol > 0.0 && rtol < 1.0)) os << "rtol must lie in (0, 1); ";
  if (!os.str().empty()) throw ConfigError("invalid time-stepping config: " + os.str());
  problem.validate();
  materials.validate();
}

namespace {

using Quad = std::array<double, 16>;

// Bilinear mass and stiffness on an h x h square, local node a = i + 2 j.
void quad_operators(double h, Quad& mass, Quad& stiff) {
  const double m1[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
  const double k1[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const int ia = a & 1, ja = a >> 1, ib = b & 1, jb = b >> 1;
      mass[a * 4 + b] = m1[ia][ib] * m1[ja][jb];
      stiff[a * 4 + b] = k1[ia][ib] * m1[ja][jb] + m1[ia][ib] * k1[ja][jb];
    }
  }
}

// Scaled running sum of x^P that cannot overflow: value = scale * sum^(1/P).
struct PNormAccumulator {
  double p;
  double scale = 0.0;
  double sum = 0.0;

  void add(double x) {
    const double a = std::abs(x);
    if (a == 0.0) return;
    if (a > scale) {
      sum = scale > 0.0 ? sum * std::pow(scale / a, p) : 0.0;
      scale = a;
    }
    sum += std::pow(x / scale, p);
  }
  double value() const { return scale > 0.0 ? scale * std::pow(sum, 1.0 / p) : 0.0; }
};

}  // namespace

TimeSteppingResult ts_forward(const TimeSteppingConfig& config,
                              std::span<const double> gamma_bar, const SliceCallback& on_step) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const int nx = config.nx1, ny = config.nx2;
  const Index ne = Index{nx} * ny;
  const Index nn = Index{nx + 1} * (ny + 1);
  if (static_cast<Index>(gamma_bar.size()) != ne) {
    throw DimensionError("time-stepping design must have one density per spatial element");
  }
  const double h = 1.0 / nx;
  const double dt = 1.0 / config.n_steps;
  auto node = [&](int i, int j) { return Index{i} + Index{nx + 1} * j; };

  Quad m_ref{}, k_ref{};
  quad_operators(h, m_ref, k_ref);
  std::vector<Triplet> mt, at;
  mt.reserve(static_cast<std::size_t>(ne) * 16);
  at.reserve(mt.capacity());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Interpolation ip = interpolate(gamma_bar[i + Index{nx} * j], config.materials);
      const Index nodes[4] = {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const double m = ip.capacity * m_ref[a * 4 + b];
          mt.push_back({nodes[a], nodes[b], m / dt});
          at.push_back({nodes[a], nodes[b], m / dt + ip.conductivity * k_ref[a * 4 + b]});
        }
      }
    }
  }
  const SparseMatrix mass_dt = SparseMatrix::from_triplets(nn, nn, std::move(mt));
  SparseMatrix system = SparseMatrix::from_triplets(nn, nn, std::move(at));

  std::vector<char> fixed(static_cast<std::size_t>(nn), 0);
  if (config.boundary_conditions) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        bool f;
        if (config.problem.example == ExampleId::OscillatingSource) {
          f = j == 0 && std::abs(i * h - 0.5) <= config.problem.sink_half_width + 1e-12;
        } else {
          f = i == 0 || j == 0 || i == nx || j == ny;
        }
        fixed[node(i, j)] = f ? 1 : 0;
      }
    }
  }
  {
    const auto ptr = system.row_ptr();
    const auto idx = system.col_idx();
    auto val = system.values();
    for (Index r = 0; r < nn; ++r) {
      for (auto p = ptr[r]; p < ptr[r + 1]; ++p) {
        if (fixed[r]) {
          val[p] = idx[p] == r ? 1.0 : 0.0;
        } else if (fixed[idx[p]]) {
          val[p] = 0.0;
        }
      }
    }
  }

  // 2x2 Gauss points on the reference square.
  std::array<std::array<double, 4>, 4> shape{};
  for (int g = 0; g < 4; ++g) {
    const double s = kGauss2[g & 1], r = kGauss2[g >> 1];
    shape[g] = {(1 - s) * (1 - r), s * (1 - r), (1 - s) * r, s * r};
  }
  auto load = [&](double t, std::vector<double>& f) {
    std::fill(f.begin(), f.end(), 0.0);
    const double w = 0.25 * h * h;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const Index nodes[4] = {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
        for (int g = 0; g < 4; ++g) {
          const double q = evaluate_source(config.problem, (i + kGauss2[g & 1]) * h,
                                           (j + kGauss2[g >> 1]) * h, t);
          if (q == 0.0) continue;
          for (int a = 0; a < 4; ++a) f[nodes[a]] += w * q * shape[g][a];
        }
      }
    }
  };

  TimeSteppingResult result;
  PNormAccumulator acc{config.p_norm};
  std::vector<double> prev(static_cast<std::size_t>(nn), 0.0), cur(prev.size(), 0.0);
  std::vector<double> rhs(prev.size()), f(prev.size());
  for (int n = 1; n <= config.n_steps; ++n) {
    const double t = n * dt;
    load(t, f);
    mass_dt.multiply(prev, rhs);
    for (Index r = 0; r < nn; ++r) rhs[r] = fixed[r] ? 0.0 : rhs[r] + f[r];
    cur = prev;
    const KrylovResult kr =
        conjugate_gradient(system, rhs, cur, config.rtol, config.max_iterations);
    result.linear_iterations += kr.iterations;
    if (!kr.converged) {
      std::ostringstream os;
      os << "time step " << n << " did not converge (relative residual " << kr.relative_residual
         << ")";
      throw SolverError(os.str());
    }
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const Index a = node(i, j), b = node(i + 1, j), c = node(i, j + 1), d = node(i + 1, j + 1);
        acc.add(0.125 * (prev[a] + prev[b] + prev[c] + prev[d] + cur[a] + cur[b] + cur[c] + cur[d]));
      }
    }
    if (on_step) on_step(n, t, cur);
    std::swap(prev, cur);
  }
  result.final_temperature = std::move(prev);
  result.phi = acc.value();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

DiffusionDiagnostics diffusion_diagnostics(const MaterialSet& m, double length, double dx,
                                           double dt) {
  if (!(length > 0.0 && dx > 0.0 && dt > 0.0)) {
    throw ConfigError("diagnostics need positive L, dx and dt");
  }
  m.validate();
  DiffusionDiagnostics d;
  d.tau_diff_con = m.c_con * length * length / m.k_con;
  d.tau_diff_ins = m.c_ins * length * length / m.k_ins;
  d.fourier_con = m.k_tilde_con() * dt / (m.c_con * dx * dx);
  d.fourier_ins = m.k_tilde_ins() * dt / (m.c_ins * dx * dx);
  return d;
}

}  // namespace sttopo
