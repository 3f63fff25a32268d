#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sttopo/error.hpp"
#include "sttopo/timestepping.hpp"

using namespace sttopo;

namespace {

// Dense steady-state oracle: k K T = f on a bilinear quad mesh with the
// moving-source walls fixed, load by 2x2 Gauss.
oracle::Vec steady_state(int n, double k, const ProblemDefinition& p) {
  const double h = 1.0 / n;
  const int nn = (n + 1) * (n + 1);
  Eigen::Matrix4d ke;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      ke(a, b) = oracle::stiff1(h)(a & 1, b & 1) * oracle::mass1(h)(a >> 1, b >> 1) +
                 oracle::mass1(h)(a & 1, b & 1) * oracle::stiff1(h)(a >> 1, b >> 1);
  oracle::Dense K = oracle::Dense::Zero(nn, nn);
  oracle::Vec f = oracle::Vec::Zero(nn);
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int nodes[4] = {i + (n + 1) * j, i + 1 + (n + 1) * j, i + (n + 1) * (j + 1),
                            i + 1 + (n + 1) * (j + 1)};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) K(nodes[a], nodes[b]) += k * ke(a, b);
      for (int gy = 0; gy < 2; ++gy) {
        for (int gx = 0; gx < 2; ++gx) {
          const double q = evaluate_source(p, (i + gp[gx]) * h, (j + gp[gy]) * h, 0.0);
          const double sx[2] = {1 - gp[gx], gp[gx]}, sy[2] = {1 - gp[gy], gp[gy]};
          for (int a = 0; a < 4; ++a) f(nodes[a]) += 0.25 * h * h * q * sx[a & 1] * sy[a >> 1];
        }
      }
    }
  }
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (i == 0 || j == 0 || i == n || j == n) {
        const int r = i + (n + 1) * j;
        K.row(r).setZero();
        K.col(r).setZero();
        K(r, r) = 1.0;
        f(r) = 0.0;
      }
    }
  }
  return oracle::solve(K, f);
}

TimeSteppingConfig static_source(int n, int steps, double tau) {
  TimeSteppingConfig c;
  c.nx1 = c.nx2 = n;
  c.n_steps = steps;
  c.problem = ProblemDefinition::moving();
  c.problem.omega = 0.0;
  c.materials.tau = tau;
  c.rtol = 1e-13;
  return c;
}

}  // namespace

TEST_SUITE("timestepping") {
  TEST_CASE("zero source stays zero") {
    TimeSteppingConfig c;
    c.nx1 = c.nx2 = 8;
    c.n_steps = 16;
    c.problem.q0 = 0.0;
    int steps = 0;
    const auto r = ts_forward(c, std::vector<double>(64, 0.4), [&](int, double, std::span<const double> t) {
      ++steps;
      for (double v : t) CHECK(v == 0.0);
    });
    CHECK(steps == 16);
    CHECK(r.phi == 0.0);
  }

  TEST_CASE("uniform field follows the scalar recurrence") {
    // No sink and a space-uniform source: T stays uniform and C (T^n - T^{n-1}) / dt = Q(t_n).
    TimeSteppingConfig c;
    c.nx1 = c.nx2 = 4;
    c.n_steps = 20;
    c.boundary_conditions = false;
    c.rtol = 1e-14;
    const double cap = 1.0, dt = 1.0 / c.n_steps;
    double t_prev = 0.0, scale = 0.0;
    std::vector<double> avgs;
    const auto r = ts_forward(c, std::vector<double>(16, 1.0), [&](int n, double t, std::span<const double> T) {
      CHECK(t == doctest::Approx(n * dt).epsilon(1e-15));
      const double expect = t_prev + dt * evaluate_source(c.problem, 0.5, 0.5, t) / cap;
      for (double v : T) CHECK(std::abs(v - expect) <= 1e-12 * std::max(1.0, expect));
      avgs.push_back(0.5 * (t_prev + expect));
      scale = std::max(scale, avgs.back());
      t_prev = expect;
    });
    double theta = 0.0;
    for (double a : avgs) theta += 16.0 * std::pow(a / scale, 20.0);
    CHECK(r.phi == doctest::Approx(scale * std::pow(theta, 0.05)).epsilon(1e-11));
  }

  TEST_CASE("static source approaches the discrete steady state") {
    const TimeSteppingConfig c = static_source(8, 64, 200.0);
    const auto r = ts_forward(c, std::vector<double>(64, 1.0));
    const oracle::Vec ss = steady_state(8, c.materials.k_tilde_con(), c.problem);
    CHECK(oracle::rel_l2(r.final_temperature, oracle::to_std(ss)) <= 1e-6);
  }

  TEST_CASE("large steps stay bounded") {
    const oracle::Vec ss = steady_state(8, MaterialSet{}.k_tilde_con() * 5.0, static_source(8, 1, 5.0).problem);
    for (int steps : {1, 2, 8, 64}) {
      const auto r = ts_forward(static_source(8, steps, 5.0), std::vector<double>(64, 1.0));
      double norm = 0.0;
      for (double v : r.final_temperature) {
        CHECK(std::isfinite(v));
        norm += v * v;
      }
      CHECK(std::sqrt(norm) <= 1.01 * ss.norm());
    }
  }

  TEST_CASE("input errors") {
    TimeSteppingConfig c;
    c.nx1 = c.nx2 = 4;
    CHECK_THROWS_AS(ts_forward(c, std::vector<double>(15, 0.5)), DimensionError);
    c.n_steps = 0;
    CHECK_THROWS_AS(ts_forward(c, std::vector<double>(16, 0.5)), ConfigError);
  }

  TEST_CASE("diffusion timescales") {
    MaterialSet b;
    b.k_con = 3.0;
    CHECK(diffusion_diagnostics(b, 1.0, 0.01, 0.01).tau_diff_con == doctest::Approx(0.3333).epsilon(1e-3));
    MaterialSet cc;
    cc.k_con = 10.0;
    CHECK(diffusion_diagnostics(cc, 1.0, 0.01, 0.01).tau_diff_con == doctest::Approx(0.10));
    MaterialSet d;
    d.c_con = 100.0;
    CHECK(diffusion_diagnostics(d, 1.0, 0.01, 0.01).tau_diff_con == doctest::Approx(33.333).epsilon(1e-4));
    const DiffusionDiagnostics fo = diffusion_diagnostics(MaterialSet{}, 1.0, 0.5, 0.25);
    CHECK(fo.fourier_con == doctest::Approx(3.0 * 0.25 / 0.25));
    CHECK(fo.fourier_ins == doctest::Approx(0.03 * 0.25 / (0.5 * 0.25)));
    CHECK_THROWS_AS(diffusion_diagnostics(MaterialSet{}, 0.0, 0.1, 0.1), ConfigError);
  }
}
