#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sttopo/design.hpp"
#include "sttopo/error.hpp"

using namespace sttopo;

TEST_SUITE("design") {
  TEST_CASE("SIMP interpolation") {
    const MaterialSet m;
    const Interpolation a = interpolate(0.0, m);
    CHECK(a.capacity == 0.5);
    CHECK(a.conductivity == doctest::Approx(0.03));
    const Interpolation b = interpolate(1.0, m);
    CHECK(b.capacity == 1.0);
    CHECK(b.conductivity == doctest::Approx(3.0));
    const Interpolation c = interpolate(0.5, m);
    CHECK(c.capacity == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(c.conductivity == doctest::Approx(0.40125).epsilon(1e-15));
    const double h = 1e-6;
    const Interpolation p = interpolate(0.3 + h, m), q = interpolate(0.3 - h, m);
    const Interpolation mid = interpolate(0.3, m);
    CHECK(mid.d_capacity == doctest::Approx((p.capacity - q.capacity) / (2 * h)).epsilon(1e-8));
    CHECK(mid.d_conductivity ==
          doctest::Approx((p.conductivity - q.conductivity) / (2 * h)).epsilon(1e-8));
    CHECK_THROWS_AS(interpolate(1.1, m), ConfigError);
    CHECK_THROWS_AS(interpolate(-0.1, m), ConfigError);
  }

  TEST_CASE("projection values") {
    CHECK(project(0.0, 32, 0.5).value == doctest::Approx(0.0));
    CHECK(project(1.0, 32, 0.5).value == doctest::Approx(1.0));
    CHECK(project(0.5, 32, 0.5).value == doctest::Approx(0.5).epsilon(1e-15));
    // (tanh 16 + tanh 3.2) / (2 tanh 16)
    CHECK(project(0.6, 32, 0.5).value == doctest::Approx(0.9983412).epsilon(1e-7));
    CHECK(project(0.4, 32, 0.5).value == doctest::Approx(1.0 - 0.9983412).epsilon(1e-5));
    const double h = 1e-7;
    const double fd = (project(0.47 + h, 32, 0.5).value - project(0.47 - h, 32, 0.5).value) / (2 * h);
    CHECK(project(0.47, 32, 0.5).derivative == doctest::Approx(fd).epsilon(1e-6));
  }

  TEST_CASE("filter keeps constants") {
    const SpaceTimeMesh mesh(4, 4, 4);
    const DensityFilter f(mesh, FilterConfig{});
    const std::vector<double> c(static_cast<std::size_t>(mesh.num_elements()), 0.37);
    for (double v : f.apply(c)) CHECK(v == doctest::Approx(0.37).epsilon(1e-9));
  }

  TEST_CASE("filter matches the dense oracle and preserves volume") {
    FilterConfig cfg;
    cfg.rtol = 1e-14;
    const SpaceTimeMesh mesh(4, 4, 4);
    const DensityFilter f(mesh, cfg);
    std::mt19937_64 rng(3);
    const auto g = oracle::random_vector(static_cast<std::size_t>(mesh.num_elements()), rng, 0, 1);
    const auto out = f.apply(g);
    const FilterConfig r = cfg.resolved(mesh);
    const oracle::Vec ref = oracle::filter_map(mesh, r.r_x, r.r_t) * oracle::to_eigen(g);
    for (std::size_t e = 0; e < out.size(); ++e) CHECK(std::abs(out[e] - ref(e)) < 1e-9);
    double vin = 0, vout = 0;
    for (std::size_t e = 0; e < out.size(); ++e) {
      vin += g[e] * mesh.element_volume();
      vout += out[e] * mesh.element_volume();
    }
    CHECK(std::abs(vin - vout) < 1e-10);
  }

  TEST_CASE("filter impulse response") {
    FilterConfig cfg;
    cfg.rtol = 1e-13;
    const SpaceTimeMesh mesh(8, 8, 8);
    const DensityFilter f(mesh, cfg);
    std::vector<double> g(static_cast<std::size_t>(mesh.num_elements()), 0.0);
    const Index centre = mesh.element(4, 4, 4);
    g[centre] = 1.0;
    const auto out = f.apply(g);
    const FilterConfig r = cfg.resolved(mesh);
    const oracle::Vec ref = oracle::filter_map(mesh, r.r_x, r.r_t).col(centre);
    double peak = 0;
    Index arg = -1;
    for (std::size_t e = 0; e < out.size(); ++e) {
      CHECK(out[e] > 0.0);
      CHECK(std::abs(out[e] - ref(e)) < 1e-10);
      if (out[e] > peak) {
        peak = out[e];
        arg = static_cast<Index>(e);
      }
    }
    CHECK(arg == centre);
    // Decay along the x1 line through the impulse.
    for (int i = 4; i < 7; ++i) {
      CHECK(out[mesh.element(i, 4, 4)] > out[mesh.element(i + 1, 4, 4)]);
    }
    for (int i = 4; i > 0; --i) {
      CHECK(out[mesh.element(i, 4, 4)] > out[mesh.element(i - 1, 4, 4)]);
    }
  }

  TEST_CASE("filter adjoint identity and linearity") {
    FilterConfig cfg;
    cfg.rtol = 1e-14;
    const SpaceTimeMesh mesh(6, 6, 8);
    const DensityFilter f(mesh, cfg);
    std::mt19937_64 rng(9);
    const auto n = static_cast<std::size_t>(mesh.num_elements());
    const auto x = oracle::random_vector(n, rng), y = oracle::random_vector(n, rng);
    const double lhs = oracle::dot(f.apply(x), y);
    const double rhs = oracle::dot(x, f.apply_transpose(y));
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    std::vector<double> sum(n);
    for (std::size_t i = 0; i < n; ++i) sum[i] = 2.0 * x[i] - 3.0 * y[i];
    const auto fs = f.apply(sum), fx = f.apply(x), fy = f.apply(y);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(fs[i] - (2 * fx[i] - 3 * fy[i])) < 1e-12);
  }

  TEST_CASE("filter non-convergence is reported") {
    FilterConfig cfg;
    cfg.max_iterations = 1;
    cfg.rtol = 1e-14;
    const SpaceTimeMesh mesh(6, 6, 6);
    const DensityFilter f(mesh, cfg);
    std::mt19937_64 rng(1);
    const auto g = oracle::random_vector(static_cast<std::size_t>(mesh.num_elements()), rng);
    CHECK_THROWS_AS(f.apply(g), SolverError);
  }

  TEST_CASE("extrusion") {
    const SpaceTimeMesh mesh(4, 4, 6);
    const Extrusion ex(mesh);
    const SparseMatrix e = ex.matrix();
    CHECK(e.rows() == mesh.num_elements());
    CHECK(e.cols() == 16);
    const std::vector<double> ones_full(static_cast<std::size_t>(mesh.num_elements()), 1.0);
    for (double c : transpose_spmv(e, ones_full)) CHECK(c == 6.0);
    for (double v : ex.extrude(std::vector<double>(16, 1.0))) CHECK(v == 1.0);
    std::mt19937_64 rng(2);
    const auto x = oracle::random_vector(16, rng);
    const auto y = oracle::random_vector(ones_full.size(), rng);
    CHECK(std::abs(oracle::dot(ex.extrude(x), y) - oracle::dot(x, ex.reduce(y))) < 1e-12);
    const auto ex_x = ex.extrude(x);
    const auto mat_x = spmv(e, x);
    CHECK(std::equal(ex_x.begin(), ex_x.end(), mat_x.begin()));
    CHECK_THROWS_AS(ex.extrude(y), DimensionError);
  }

  TEST_CASE("time-constant designs stay slab-constant") {
    const SpaceTimeMesh mesh(8, 8, 8);
    DesignPipeline pipe(mesh, FilterConfig{.rtol = 1e-13}, DesignMode::TimeConstant);
    CHECK(pipe.num_variables() == 64);
    std::mt19937_64 rng(4);
    const auto g = oracle::random_vector(64, rng, 0.0, 1.0);
    const DesignState& s = pipe.forward(g);
    for (int k = 1; k < mesh.nt(); ++k) {
      for (Index e = 0; e < 64; ++e) {
        CHECK(s.gamma_full[k * 64 + e] == s.gamma_full[e]);
        CHECK(std::abs(s.gamma_bar[k * 64 + e] - s.gamma_bar[e]) <= 1e-10);
      }
    }
  }

  TEST_CASE("pipeline monotonicity") {
    const SpaceTimeMesh mesh(6, 6, 6);
    for (DesignMode mode : {DesignMode::TimeConstant, DesignMode::SpaceTime}) {
      DesignPipeline pipe(mesh, FilterConfig{.rtol = 1e-13}, mode);
      std::mt19937_64 rng(5);
      auto g = oracle::random_vector(static_cast<std::size_t>(pipe.num_variables()), rng, 0.1, 0.9);
      const std::vector<double> base = pipe.forward(g).gamma_bar;
      std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
      for (int trial = 0; trial < 5; ++trial) {
        auto h = g;
        h[pick(rng)] += 0.05;
        const auto& bar = pipe.forward(h).gamma_bar;
        for (std::size_t e = 0; e < bar.size(); ++e) CHECK(bar[e] - base[e] >= -1e-12);
      }
    }
  }

  TEST_CASE("chain rule limits and errors") {
    const SpaceTimeMesh mesh(4, 4, 4);
    FilterConfig cfg;
    cfg.beta = 1e-6;
    cfg.rtol = 1e-14;
    DesignPipeline pipe(mesh, cfg, DesignMode::SpaceTime);
    const auto n = static_cast<std::size_t>(mesh.num_elements());
    CHECK_THROWS_AS(pipe.chain_rule_backward(std::vector<double>(n, 1.0)), ConfigError);
    std::mt19937_64 rng(6);
    pipe.forward(oracle::random_vector(n, rng, 0.0, 1.0));
    const auto d = oracle::random_vector(n, rng);
    const auto chained = pipe.chain_rule_backward(d);
    // Projection slope at beta -> 0 is beta / tanh-sum -> 1.
    const auto direct = pipe.filter().apply_transpose(d);
    for (std::size_t e = 0; e < n; ++e) CHECK(std::abs(chained[e] - direct[e]) < 1e-8);
    for (double v : pipe.chain_rule_backward(std::vector<double>(n, 0.0))) CHECK(v == 0.0);
    pipe.invalidate();
    CHECK_THROWS_AS(pipe.chain_rule_backward(d), ConfigError);
    CHECK_THROWS_AS(pipe.forward(std::vector<double>(3, 0.5)), DimensionError);
  }

  TEST_CASE("design mode names") {
    CHECK(parse_design_mode("space-time") == DesignMode::SpaceTime);
    CHECK(to_string(DesignMode::TimeConstant) == "time-constant");
    CHECK_THROWS_AS(parse_design_mode("extruded"), ConfigError);
  }
}
