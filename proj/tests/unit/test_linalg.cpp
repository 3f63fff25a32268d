#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sttopo/assembly.hpp"
#include "sttopo/error.hpp"
#include "sttopo/krylov.hpp"
#include "sttopo/multigrid.hpp"
#include "sttopo/parallel.hpp"
#include "sttopo/sparse.hpp"

using namespace sttopo;

namespace {

SparseMatrix random_sparse(Index rows, Index cols, double density, std::mt19937_64& rng,
                           double diag_shift = 0.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), p(0.0, 1.0);
  std::vector<Triplet> t;
  for (Index r = 0; r < rows; ++r) {
    double off = 0.0;
    for (Index c = 0; c < cols; ++c) {
      if (r != c && p(rng) < density) {
        const double v = u(rng);
        off += std::abs(v);
        t.push_back({r, c, v});
      }
    }
    if (diag_shift > 0.0 && r < cols) t.push_back({r, r, off + diag_shift});
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

// Example 1 system with a random design, Dirichlet conditions applied.
struct TestSystem {
  SpaceTimeMesh mesh;
  SparseMatrix j;
  std::vector<double> f;
};

TestSystem example_system(int n, int nt, const ProblemDefinition& p, std::uint64_t seed) {
  const SpaceTimeMesh mesh(n, n, nt);
  std::mt19937_64 rng(seed);
  const auto ne = static_cast<std::size_t>(mesh.num_elements());
  MaterialSet m;
  m.tau = p.tau;
  const auto c = oracle::random_vector(ne, rng, m.c_ins, m.c_con);
  const auto k = oracle::random_vector(ne, rng, m.k_tilde_ins(), m.k_tilde_con());
  TestSystem s{mesh, assemble_system(mesh, c, k), assemble_source(mesh, p)};
  apply_dirichlet(s.j, s.f, dirichlet_set(mesh, p));
  return s;
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("sparse products against dense") {
    std::mt19937_64 rng(1);
    const SparseMatrix a = random_sparse(50, 50, 0.1, rng);
    const auto x = oracle::random_vector(50, rng);
    const oracle::Vec ref = oracle::to_dense(a) * oracle::to_eigen(x);
    const auto y = spmv(a, x);
    for (int i = 0; i < 50; ++i) CHECK(std::abs(y[i] - ref(i)) < 1e-14);
    const oracle::Vec reft = oracle::to_dense(a).transpose() * oracle::to_eigen(x);
    const auto yt = transpose_spmv(a, x);
    for (int i = 0; i < 50; ++i) CHECK(std::abs(yt[i] - reft(i)) < 1e-14);
    const auto id = spmv(SparseMatrix::identity(50), x);
    CHECK(std::equal(id.begin(), id.end(), x.begin()));
    const SparseMatrix tt = a.transposed().transposed();
    CHECK((oracle::to_dense(tt) - oracle::to_dense(a)).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("dimension mismatch is reported") {
    std::mt19937_64 rng(2);
    const SparseMatrix a = random_sparse(5, 4, 0.5, rng);
    std::vector<double> x(5), y(5);
    CHECK_THROWS_AS(a.multiply(x, y), DimensionError);
    CHECK_THROWS_AS(multiply(a, a), DimensionError);
  }

  TEST_CASE("CSR validation") {
    CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), DimensionError);
    CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 2}, {1, 1}, {1.0, 1.0}), DimensionError);
    const SparseMatrix s = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {0, 1, 2.0}});
    CHECK(s.at(0, 1) == 3.0);
    CHECK(s.nnz() == 1);
  }

  TEST_CASE("gmres on trivial systems") {
    const SparseMatrix id = SparseMatrix::identity(10);
    std::vector<double> b(10, 2.0), x(10, 0.0);
    const auto r = gmres(id, JacobiPreconditioner(id), b, x, 1e-12, 10);
    CHECK(r.converged);
    CHECK(r.iterations <= 1);
    std::vector<Triplet> t;
    for (Index i = 0; i < 10; ++i) t.push_back({i, i, 1.0 + i});
    const SparseMatrix d = SparseMatrix::from_triplets(10, 10, t);
    std::fill(x.begin(), x.end(), 0.0);
    const auto rd = gmres(d, JacobiPreconditioner(d), b, x, 1e-12, 10);
    CHECK(rd.iterations == 1);
    for (Index i = 0; i < 10; ++i) CHECK(x[i] == doctest::Approx(2.0 / (1.0 + i)));
  }

  TEST_CASE("gmres matches dense solve") {
    std::mt19937_64 rng(5);
    const SparseMatrix a = random_sparse(30, 30, 0.3, rng, 0.5);
    const auto b = oracle::random_vector(30, rng);
    std::vector<double> x(30, 0.0);
    const auto r = gmres(a, JacobiPreconditioner(a), b, x, 1e-12, 100);
    CHECK(r.converged);
    const oracle::Vec ref = oracle::solve(oracle::to_dense(a), oracle::to_eigen(b));
    CHECK(oracle::rel_l2(x, oracle::to_std(ref)) <= 1e-8);
  }

  TEST_CASE("zero diagonal is rejected") {
    const SparseMatrix a = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
    CHECK_THROWS_AS(JacobiPreconditioner{a}, SolverError);
  }

  TEST_CASE("conjugate gradient on an SPD matrix") {
    std::mt19937_64 rng(8);
    const SparseMatrix a0 = random_sparse(40, 40, 0.2, rng, 1.0);
    const SparseMatrix a = multiply(a0.transposed(), a0);
    const auto b = oracle::random_vector(40, rng);
    std::vector<double> x(40, 0.0);
    CHECK(conjugate_gradient(a, b, x, 1e-12, 1000).converged);
    const oracle::Vec ref = oracle::solve(oracle::to_dense(a), oracle::to_eigen(b));
    CHECK(oracle::rel_l2(x, oracle::to_std(ref)) <= 1e-9);
  }

  TEST_CASE("prolongation weights") {
    GridLevel fine{0, 4, 4, 4, 0.25, 0.25, CoarseningKind::Finest, 0.0};
    GridLevel time{1, 4, 4, 2, 0.25, 0.5, CoarseningKind::Time, 0.0};
    const SparseMatrix pt = build_prolongation(fine, time);
    const SpaceTimeMesh fm(4, 4, 4), cm(4, 4, 2);
    CHECK(pt.at(fm.node(1, 2, 1), cm.node(1, 2, 0)) == 0.5);
    CHECK(pt.at(fm.node(1, 2, 1), cm.node(1, 2, 1)) == 0.5);
    CHECK(pt.at(fm.node(1, 2, 2), cm.node(1, 2, 1)) == 1.0);
    const std::vector<double> ones(static_cast<std::size_t>(cm.num_nodes()), 1.0);
    for (double v : spmv(pt, ones)) CHECK(v == 1.0);
    GridLevel bad{1, 1, 1, 4, 1.0, 0.25, CoarseningKind::Space, 0.0};
    CHECK_THROWS_AS(build_prolongation(fine, bad), HierarchyError);
    CHECK_THROWS_AS(build_prolongation(fine, fine), HierarchyError);
  }

  TEST_CASE("space prolongation matches a hand-built oracle") {
    GridLevel fine{0, 4, 4, 2, 0.25, 0.5, CoarseningKind::Finest, 0.0};
    GridLevel coarse{1, 2, 2, 2, 0.5, 0.5, CoarseningKind::Space, 0.0};
    const SparseMatrix p = build_prolongation(fine, coarse);
    const SpaceTimeMesh fm(4, 4, 2), cm(2, 2, 2);
    oracle::Dense ref = oracle::Dense::Zero(fm.num_nodes(), cm.num_nodes());
    auto w1 = [](int f, int c) {
      if (f == 2 * c) return 1.0;
      if (std::abs(f - 2 * c) == 1) return 0.5;
      return 0.0;
    };
    for (int k = 0; k <= 2; ++k)
      for (int j = 0; j <= 4; ++j)
        for (int i = 0; i <= 4; ++i)
          for (int cj = 0; cj <= 2; ++cj)
            for (int ci = 0; ci <= 2; ++ci)
              ref(fm.node(i, j, k), cm.node(ci, cj, k)) = w1(i, ci) * w1(j, cj);
    CHECK((oracle::to_dense(p) - ref).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("galerkin products") {
    GridLevel fine{0, 4, 4, 4, 0.25, 0.25, CoarseningKind::Finest, 0.0};
    GridLevel mid{1, 2, 2, 4, 0.5, 0.25, CoarseningKind::Space, 0.0};
    GridLevel coarse{2, 2, 2, 2, 0.5, 0.5, CoarseningKind::Time, 0.0};
    const SparseMatrix p0 = build_prolongation(fine, mid);
    const SparseMatrix p1 = build_prolongation(mid, coarse);
    const oracle::Dense d0 = oracle::to_dense(p0), d1 = oracle::to_dense(p1);
    const SparseMatrix id = SparseMatrix::identity(p0.rows());
    CHECK((oracle::to_dense(galerkin_product(id, p0)) - d0.transpose() * d0).cwiseAbs().maxCoeff() <
          1e-13);
    const TestSystem s = example_system(4, 4, ProblemDefinition::oscillating(), 3);
    const oracle::Dense j = oracle::to_dense(s.j);
    const SparseMatrix two_step = galerkin_product(galerkin_product(s.j, p0), p1);
    const oracle::Dense composite = (d0 * d1).transpose() * j * (d0 * d1);
    CHECK((oracle::to_dense(two_step) - composite).cwiseAbs().maxCoeff() <
          1e-12 * composite.cwiseAbs().maxCoeff());
    const SparseMatrix lhs = galerkin_product(s.j, p0).transposed();
    const SparseMatrix rhs = galerkin_product(s.j.transposed(), p0);
    CHECK((oracle::to_dense(lhs) - oracle::to_dense(rhs)).cwiseAbs().maxCoeff() <
          1e-13 * j.cwiseAbs().maxCoeff());
  }

  TEST_CASE("degenerate two-level cycle equals three smoother applications") {
    const TestSystem s = example_system(4, 4, ProblemDefinition::oscillating(), 9);
    SolverConfig cfg;
    const Index n = s.j.rows();
    Multigrid mg({SparseMatrix::identity(n)}, s.j, cfg);
    std::mt19937_64 rng(4);
    const auto r = oracle::random_vector(static_cast<std::size_t>(n), rng);
    std::vector<double> z(r.size());
    mg.apply(r, z);

    const JacobiPreconditioner jac(s.j);
    std::vector<double> ref(r.size(), 0.0), res(r.size()), e(r.size(), 0.0);
    gmres(s.j, jac, r, ref, cfg.smoother_rtol, cfg.smoother_maxit, cfg.smoother_maxit);
    s.j.residual(r, ref, res);
    const double r1 = norm2(res);
    gmres(s.j, jac, res, e, cfg.smoother_rtol, cfg.coarse_maxit, cfg.coarse_maxit);
    axpy(1.0, e, ref);
    s.j.residual(r, ref, res);
    const double r2 = norm2(res);
    gmres(s.j, jac, r, ref, cfg.smoother_rtol, cfg.smoother_maxit, cfg.smoother_maxit);
    s.j.residual(r, ref, res);
    const double r3 = norm2(res);
    CHECK(oracle::rel_l2(z, ref) < 1e-12);
    CHECK(r1 <= norm2(r));
    CHECK(r2 <= r1 * (1 + 1e-12));
    CHECK(r3 <= r2 * (1 + 1e-12));
  }

  TEST_CASE("zero residual gives zero correction") {
    const TestSystem s = example_system(8, 8, ProblemDefinition::oscillating(), 2);
    const Hierarchy h = build_hierarchy(s.mesh, MaterialSet{}, 2);
    Multigrid mg(h, s.j, SolverConfig{});
    std::vector<double> r(s.f.size(), 0.0), z(s.f.size(), 1.0);
    mg.apply(r, z);
    for (double v : z) CHECK(v == 0.0);
    CHECK_THROWS_AS(mg.level_operator(5), HierarchyError);
  }

  TEST_CASE("fgmres with zero rhs and zero start") {
    const TestSystem s = example_system(4, 4, ProblemDefinition::oscillating(), 1);
    std::vector<double> b(s.f.size(), 0.0), x(s.f.size(), 0.0);
    const JacobiPreconditioner jac(s.j);
    const SolverStats st = fgmres(s.j, b, x, [&](auto r, auto z) { jac.apply(r, z); }, {});
    CHECK(st.converged());
    CHECK(st.outer_iterations == 0);
    for (double v : x) CHECK(v == 0.0);
  }

  TEST_CASE("state and adjoint solves match dense solves") {
    for (const auto& p : {ProblemDefinition::oscillating(), ProblemDefinition::moving()}) {
      const TestSystem s = example_system(6, 8, p, 21);
      MaterialSet m;
      m.tau = p.tau;
      SolverConfig cfg;
      cfg.outer_rtol = 1e-10;
      const Multigrid mg(build_hierarchy(s.mesh, m), s.j, cfg);
      std::vector<double> x(s.f.size(), 0.0);
      const SolverStats st = solve_with_multigrid(mg, s.f, x);
      CHECK(st.converged());
      const oracle::Dense d = oracle::to_dense(s.j);
      CHECK(oracle::rel_l2(x, oracle::to_std(oracle::solve(d, oracle::to_eigen(s.f)))) <= 1e-8);
      for (std::size_t i = 1; i < st.residual_history.size(); ++i) {
        CHECK(st.residual_history[i] <= st.residual_history[i - 1] * (1 + 1e-12));
      }

      std::mt19937_64 rng(6);
      auto g = oracle::random_vector(s.f.size(), rng);
      for (Index n : dirichlet_set(s.mesh, p)) g[n] = 0.0;
      const Multigrid mgt = mg.transposed();
      std::vector<double> lam(g.size(), 0.0);
      CHECK(solve_with_multigrid(mgt, g, lam).converged());
      const oracle::Vec ref = oracle::solve(d.transpose(), oracle::to_eigen(g));
      CHECK(oracle::rel_l2(lam, oracle::to_std(ref)) <= 1e-8);
    }
  }

  TEST_CASE("multigrid and Jacobi preconditioning agree") {
    const TestSystem s = example_system(8, 8, ProblemDefinition::oscillating(), 12);
    SolverConfig cfg;
    cfg.outer_rtol = 1e-8;
    const Multigrid mg(build_hierarchy(s.mesh, MaterialSet{}), s.j, cfg);
    std::vector<double> a(s.f.size(), 0.0), b(s.f.size(), 0.0);
    CHECK(solve_with_multigrid(mg, s.f, a).converged());
    const JacobiPreconditioner jac(s.j);
    SolverConfig jc = cfg;
    jc.outer_maxit = 2000;
    jc.restart = 400;
    CHECK(fgmres(s.j, s.f, b, [&](auto r, auto z) { jac.apply(r, z); }, jc).converged());
    CHECK(oracle::rel_l2(a, b) <= 10 * cfg.outer_rtol);
  }

  TEST_CASE("symmetric matrix: adjoint equals state") {
    std::mt19937_64 rng(13);
    const SparseMatrix a0 = random_sparse(60, 60, 0.1, rng, 1.0);
    const SparseMatrix a = multiply(a0.transposed(), a0);
    const auto b = oracle::random_vector(60, rng);
    const Multigrid mg({SparseMatrix::identity(60)}, a, SolverConfig{});
    std::vector<double> x(60, 0.0), y(60, 0.0);
    solve_with_multigrid(mg, b, x);
    solve_with_multigrid(mg.transposed(), b, y);
    CHECK(oracle::rel_l2(x, y) < 1e-12);
  }

  TEST_CASE("deterministic reductions") {
    std::mt19937_64 rng(17);
    const auto a = oracle::random_vector(100000, rng);
    const auto b = oracle::random_vector(100000, rng);
    const double d1 = dot(a, b);
    const int threads = thread_count();
    set_thread_count(1);
    const double d2 = dot(a, b);
    set_thread_count(threads);
    CHECK(d1 == d2);
  }
}
