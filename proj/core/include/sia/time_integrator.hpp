#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sia/step_solver.hpp"

namespace sia {

/// Uniform grid t_n = n ell on [0, T], ell = T / N.
struct TimeGrid {
  double T = 1.0;
  int N = 1;

  double ell() const { return T / static_cast<double>(N); }
  double time(int n) const { return n == N ? T : static_cast<double>(n) * ell(); }
  void validate() const;
};

struct RunOptions {
  double kappa = 1e-3;
  Regularization reg{};
  SolverConfig solver{};
  unsigned threads = 1;
};

struct StepSummary {
  int iterations = 0;
  double final_residual = 0.0;
  double final_energy = 0.0;
  int backtracks = 0;
  int gradient_fallbacks = 0;
};

/// Everything needed to reproduce a run.
struct RunMetadata {
  double p = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
  Regularization reg{};
  SolverConfig solver{};
  std::size_t nx = 0;
  std::size_t ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  double T = 0.0;
  int N = 0;
  std::string forcing;
  std::string quadrature;
  std::string version;
};

/// States u^{first_step} .. u^N of an implicit march.
struct Trajectory {
  std::vector<NodalField> states;
  std::vector<StepSummary> step_diagnostics;
  TimeGrid time_grid;
  int first_step = 0;
  RunMetadata meta;

  int last_step() const { return first_step + static_cast<int>(states.size()) - 1; }
  const NodalField& state(int n) const { return states.at(static_cast<std::size_t>(n - first_step)); }
};

/// A step failed; carries the states computed before the failure.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, int step, Trajectory partial)
      : std::runtime_error(what), step_(step), partial_(std::move(partial)) {}
  int step() const { return step_; }
  const Trajectory& partial() const { return partial_; }

 private:
  int step_;
  Trajectory partial_;
};

/// Metadata a run with these inputs records.
RunMetadata run_metadata(const StructuredMesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
                         const RunOptions& options);

/// Slab average (1/ell) int_{n ell}^{(n+1) ell} a(t) dt at every node.
NodalField average_forcing(const Forcing& forcing, int n, const TimeGrid& grid, const StructuredMesh& mesh);

/// March u^0 = params.u0 to u^N. Throws StepFailure (wrapping the solver
/// error) if a step does not converge.
Trajectory run(const StructuredMesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
               const RunOptions& options);

/// Continue a march from `state` = u^{first_step}.
Trajectory resume(const StructuredMesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
                  const RunOptions& options, const NodalField& state, int first_step);

/// Piecewise-constant interpolant: u^{n+1} for n ell < t <= (n+1) ell.
/// Throws std::out_of_range for t <= 0, t > T, or a slab not stored.
const NodalField& interpolant_value(const Trajectory& traj, double t);

/// (g(u^{n+1}) - g(u^n)) / ell nodewise, for 0 <= n <= N-1.
NodalField difference_quotient(const Trajectory& traj, const std::function<double(double)>& transform, int n);

}  // namespace sia
