#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sia/discrete_operators.hpp"

namespace sia {

struct SolverConfig {
  /// Convergence threshold on max_i |F_i| / m_i.
  double tol_residual = 1e-10;
  int max_newton = 100;
  int max_backtrack = 60;
  /// Sufficient-decrease constant of the Armijo test on the step energy.
  double armijo_c = 1e-4;
  double cg_tol = 1e-10;
  int cg_max = 5000;

  void validate() const;
};

struct StepResult {
  NodalField u_next;
  int iterations = 0;
  double final_residual = 0.0;
  double final_energy = 0.0;
  int backtracks = 0;
  int gradient_fallbacks = 0;
  bool converged = false;
  std::vector<double> energy_history;    // one entry per accepted iterate, starting with the guess
  std::vector<double> residual_history;  // same indexing
};

/// Minimizes step_energy by damped Newton with Armijo backtracking on the
/// energy. Falls back to a diagonally preconditioned gradient step when the
/// inner solve meets negative curvature or does not give a descent direction.
///
/// Throws NonConvergence when max_newton is exhausted or the line search
/// fails, NumericalBreakdown on non-finite values.
StepResult solve_step(const StepProblem& problem, const SolverConfig& config,
                      std::span<const double> initial_guess);

/// Warm start from problem.u_prev.
StepResult solve_step(const StepProblem& problem, const SolverConfig& config);

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

enum class CgStatus { converged, indefinite, max_iterations };

struct CgResult {
  NodalField solution;
  int iterations = 0;
  double relative_residual = 0.0;
  CgStatus status = CgStatus::converged;
};

/// Jacobi-preconditioned conjugate gradients using only operator actions.
/// Stops when ||A w - rhs||_2 <= cg_tol ||rhs||_2. Reports `indefinite` as
/// soon as a search direction with p^T A p <= 0 appears; the iterate reached
/// so far is returned.
CgResult inner_linear_solve(const LinearOperator& op, std::span<const double> diagonal,
                            std::span<const double> rhs, double cg_tol, int cg_max);

}  // namespace sia
