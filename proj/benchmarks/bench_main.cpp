#include <benchmark/benchmark.h>

#include <vector>

#include "sttopo/assembly.hpp"
#include "sttopo/element.hpp"
#include "sttopo/multigrid.hpp"

using namespace sttopo;

namespace {

SpaceTimeMesh bench_mesh(const benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  return SpaceTimeMesh(n, n, 2 * n);
}

std::vector<double> field(Index n, double v) { return std::vector<double>(static_cast<std::size_t>(n), v); }

void BM_Assembly(benchmark::State& state) {
  const SpaceTimeMesh mesh = bench_mesh(state);
  const auto c = field(mesh.num_elements(), 0.7), k = field(mesh.num_elements(), 1.3);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_system(mesh, c, k));
  state.SetItemsProcessed(state.iterations() * mesh.num_elements());
}

void BM_Spmv(benchmark::State& state) {
  const SpaceTimeMesh mesh = bench_mesh(state);
  const SparseMatrix a = assemble_uniform(mesh, element_matrix(1.0, 1.0, mesh.dx(), mesh.dt()));
  std::vector<double> x(static_cast<std::size_t>(a.rows()), 1.0), y(x.size());
  for (auto _ : state) {
    a.multiply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(a.values().size()));
}

void BM_VCycle(benchmark::State& state) {
  const SpaceTimeMesh mesh = bench_mesh(state);
  const MaterialSet m;
  SparseMatrix a = assemble_uniform(mesh, element_matrix(1.0, 1.0, mesh.dx(), mesh.dt()));
  std::vector<double> rhs = assemble_source(mesh, ProblemDefinition::oscillating());
  apply_dirichlet(a, rhs, dirichlet_set(mesh, ProblemDefinition::oscillating()));
  const Multigrid mg(build_hierarchy(mesh, m), std::move(a), SolverConfig{});
  std::vector<double> z(rhs.size());
  for (auto _ : state) {
    mg.apply(rhs, z);
    benchmark::DoNotOptimize(z.data());
  }
}

}  // namespace

BENCHMARK(BM_Assembly)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spmv)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_VCycle)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
