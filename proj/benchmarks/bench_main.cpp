// Micro-benchmarks for the hot paths: meshing, operator assembly, the linear
// and eigen solvers, nonlinear continuation, and the critical-point census.
// Sizes are kept small so the full suite runs in seconds.

#include <benchmark/benchmark.h>

#include "robinlab/critpoints.hpp"
#include "robinlab/solvers.hpp"
#include "robinlab/stability.hpp"

namespace {

using namespace robinlab;

const BoundaryCurve& disk_curve() {
  static const BoundaryCurve curve = make_domain(DomainSpec::disk(1.0));
  return curve;
}

const Mesh& disk_mesh() {
  static const Mesh mesh = triangulate(disk_curve(), 0.05);
  return mesh;
}

void bm_triangulate(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    Mesh mesh = triangulate(disk_curve(), h);
    benchmark::DoNotOptimize(mesh.nodes.data());
  }
}
BENCHMARK(bm_triangulate)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void bm_assemble_operators(benchmark::State& state) {
  const Mesh& mesh = disk_mesh();
  for (auto _ : state) {
    SparseMatrix k = stiffness(mesh);
    SparseMatrix m = interior_mass(mesh);
    SparseMatrix b = boundary_mass(mesh);
    benchmark::DoNotOptimize(k.values().data());
    benchmark::DoNotOptimize(m.values().data());
    benchmark::DoNotOptimize(b.values().data());
  }
}
BENCHMARK(bm_assemble_operators)->Unit(benchmark::kMillisecond);

void bm_cg_torsion_system(benchmark::State& state) {
  const Mesh& mesh = disk_mesh();
  const SparseMatrix a =
      SparseMatrix::combine(stiffness(mesh), 1.0, boundary_mass(mesh), 1.0);
  const Vector rhs = load_constant(mesh, 1.0);
  for (auto _ : state) {
    Vector x = cg_solve(a, rhs, 1e-10);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(bm_cg_torsion_system)->Unit(benchmark::kMillisecond);

void bm_robin_eigenpair(benchmark::State& state) {
  const Mesh& mesh = disk_mesh();
  for (auto _ : state) {
    EigenResult r = robin_eigenpair(mesh, 1.0);
    benchmark::DoNotOptimize(r.lambda_beta);
  }
}
BENCHMARK(bm_robin_eigenpair)->Unit(benchmark::kMillisecond);

void bm_picard_minimal(benchmark::State& state) {
  const Mesh& mesh = disk_mesh();
  for (auto _ : state) {
    PicardResult r = picard_minimal(mesh, 1.0, 0.4, Nonlinearity::gelfand_exp());
    benchmark::DoNotOptimize(r.field.values.data());
  }
}
BENCHMARK(bm_picard_minimal)->Unit(benchmark::kMillisecond);

void bm_continue_branch(benchmark::State& state) {
  const Mesh mesh = triangulate(disk_curve(), 0.12);
  StepPolicy policy;
  policy.with_mu1 = false;
  for (auto _ : state) {
    Branch b = continue_branch(mesh, 1.0, Nonlinearity::gelfand_exp(), policy);
    benchmark::DoNotOptimize(b.lambda_star_lo);
  }
}
BENCHMARK(bm_continue_branch)->Unit(benchmark::kMillisecond);

void bm_census(benchmark::State& state) {
  const Mesh& mesh = disk_mesh();
  const Field u = solve_torsion(mesh, 1.0);
  for (auto _ : state) {
    CritCensus c = census(mesh, u, 1.0);
    benchmark::DoNotOptimize(c.index_sum);
  }
}
BENCHMARK(bm_census)->Unit(benchmark::kMillisecond);

void bm_linearized_mu1(benchmark::State& state) {
  const Mesh& mesh = disk_mesh();
  const Field u = solve_torsion(mesh, 1.0);
  for (auto _ : state) {
    auto [mu, phi] = linearized_mu1(mesh, 1.0, u, Nonlinearity::torsion());
    benchmark::DoNotOptimize(mu);
  }
}
BENCHMARK(bm_linearized_mu1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
