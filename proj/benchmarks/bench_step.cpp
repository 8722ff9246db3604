#include <benchmark/benchmark.h>

#include <random>

#include "sia/config.hpp"
#include "sia/step_solver.hpp"

using namespace sia;

namespace {

struct Case {
  StructuredMesh mesh;
  PhysicalParams params;
  NodalField abar;
  NodalField u;

  explicit Case(std::size_t n)
      : mesh(StructuredMesh::build(n, n, 1.0, 1.0)),
        params(PhysicalParams::uniform(mesh, 3.0, 1.0, Forcing(MeltForcing{4.0}), mesh.zero_field())),
        abar(mesh.num_nodes(), -4.0),
        u(mesh.zero_field()) {
    params.u0 = sample(mesh, [](Vec2 x) { return u_from_thickness(dome_thickness(x, 1.0, 1.0, 1.0), 3.0); });
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-0.1, 1.0);
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
      if (mesh.is_boundary(i)) {
        params.u0[i] = 0.0;
        abar[i] = 0.0;
      } else {
        u[i] = d(rng);
      }
    }
  }
  StepProblem problem(unsigned threads = 1) const {
    return StepProblem{mesh, params, params.u0, abar, 0.1, 1e-3, Regularization{}, threads};
  }
};

void BM_StepResidual(benchmark::State& state) {
  const Case c(static_cast<std::size_t>(state.range(0)));
  const auto pb = c.problem();
  for (auto _ : state) benchmark::DoNotOptimize(step_residual(pb, c.u));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(c.mesh.num_triangles()));
}

void BM_JacobianAction(benchmark::State& state) {
  const Case c(static_cast<std::size_t>(state.range(0)));
  const auto pb = c.problem();
  const StepJacobian jac(pb, c.u);
  NodalField out(c.mesh.num_nodes());
  for (auto _ : state) {
    jac.apply(c.u, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(c.mesh.num_triangles()));
}

void BM_SolveStep(benchmark::State& state) {
  const Case c(static_cast<std::size_t>(state.range(0)));
  const auto pb = c.problem();
  int iterations = 0;
  for (auto _ : state) {
    const auto r = solve_step(pb, SolverConfig{});
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.u_next.data());
  }
  state.counters["newton"] = iterations;
}

}  // namespace

BENCHMARK(BM_StepResidual)->Arg(33)->Arg(65)->Arg(129);
BENCHMARK(BM_JacobianAction)->Arg(33)->Arg(65)->Arg(129);
BENCHMARK(BM_SolveStep)->Arg(17)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
