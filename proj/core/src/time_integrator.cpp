#include "sia/time_integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sia/errors.hpp"
#include "sia/version.hpp"

namespace sia {

void TimeGrid::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("time horizon T must be positive");
  if (N < 1) throw std::invalid_argument("step count N must be at least 1");
}

NodalField average_forcing(const Forcing& forcing, int n, const TimeGrid& grid, const StructuredMesh& mesh) {
  if (n < 0 || n >= grid.N) throw std::out_of_range("forcing slab index out of range");
  return forcing.slab_average(mesh, grid.time(n), grid.time(n + 1));
}

RunMetadata run_metadata(const StructuredMesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
                          const RunOptions& options) {
  RunMetadata m;
  m.p = params.p;
  m.alpha = params.alpha;
  m.kappa = options.kappa;
  m.reg = options.reg;
  m.solver = options.solver;
  m.nx = mesh.nx();
  m.ny = mesh.ny();
  m.lx = mesh.lx();
  m.ly = mesh.ly();
  m.T = grid.T;
  m.N = grid.N;
  m.forcing = params.forcing.describe();
  if (params.forcing.polynomial_in_time()) m.quadrature = "midpoint-exact";
  else if (std::holds_alternative<GriddedForcing>(params.forcing.spec())) m.quadrature = "piecewise-midpoint-exact";
  else m.quadrature = "gauss2";
  m.version = std::string(kVersion);
  return m;
}

Trajectory resume(const StructuredMesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
                  const RunOptions& options, const NodalField& state, int first_step) {
  grid.validate();
  if (first_step < 0 || first_step > grid.N) throw std::out_of_range("first_step outside the time grid");
  if (state.size() != mesh.num_nodes()) throw std::invalid_argument("state size does not match mesh");

  Trajectory traj;
  traj.time_grid = grid;
  traj.first_step = first_step;
  traj.meta = run_metadata(mesh, params, grid, options);
  traj.states.reserve(static_cast<std::size_t>(grid.N - first_step + 1));
  traj.states.push_back(state);

  for (int n = first_step; n < grid.N; ++n) {
    StepProblem problem{mesh, params, traj.states.back(), average_forcing(params.forcing, n, grid, mesh),
                        grid.ell(), options.kappa, options.reg, options.threads};
    StepResult r;
    try {
      r = solve_step(problem, options.solver);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "step " << n << " -> " << n + 1 << " failed: " << e.what();
      throw StepFailure(msg.str(), n, std::move(traj));
    }
    traj.step_diagnostics.push_back(
        {r.iterations, r.final_residual, r.final_energy, r.backtracks, r.gradient_fallbacks});
    traj.states.push_back(std::move(r.u_next));
  }
  return traj;
}

Trajectory run(const StructuredMesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
               const RunOptions& options) {
  params.validate(mesh);
  return resume(mesh, params, grid, options, params.u0, 0);
}

const NodalField& interpolant_value(const Trajectory& traj, double t) {
  const TimeGrid& g = traj.time_grid;
  if (!(t > 0.0) || t > g.T) throw std::out_of_range("interpolant time outside (0, T]");
  const double ell = g.ell();
  int n = static_cast<int>(std::ceil(t / ell)) - 1;
  n = std::clamp(n, 0, g.N - 1);
  while (n + 1 < g.N && g.time(n + 1) < t) ++n;
  while (n > 0 && g.time(n) >= t) --n;
  if (n + 1 < traj.first_step || n + 1 > traj.last_step())
    throw std::out_of_range("requested slab not stored in trajectory");
  return traj.state(n + 1);
}

NodalField difference_quotient(const Trajectory& traj, const std::function<double(double)>& transform, int n) {
  if (n < traj.first_step || n + 1 > traj.last_step()) throw std::out_of_range("difference quotient index out of range");
  const NodalField& a = traj.state(n);
  const NodalField& b = traj.state(n + 1);
  const double ell = traj.time_grid.ell();
  NodalField out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (transform(b[i]) - transform(a[i])) / ell;
  return out;
}

}  // namespace sia
