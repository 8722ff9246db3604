#pragma once

#include <array>
#include <span>
#include <vector>

#include "sia/geometry.hpp"
#include "sia/physics.hpp"

namespace sia {

/// Smoothing applied inside the per-step operator. delta regularizes the
/// degenerate p-Laplacian, |grad u|^2 -> |grad u|^2 + delta^2; eps regularizes
/// the singular slope of |u|^{alpha-2}u at zero.
struct Regularization {
  double delta = 1e-8;
  double eps = 1e-10;
};

/// One implicit step: given u_prev, find u with
///   (phi(u) - phi(u_prev))/ell - div(mu |grad u|^{p-2} grad u) + min(u,0)/kappa = a_bar
/// in the lumped-mass P1 Galerkin sense, zero on the boundary.
struct StepProblem {
  const StructuredMesh& mesh;
  const PhysicalParams& params;
  NodalField u_prev;
  NodalField a_bar;
  double ell = 1.0;
  double kappa = 1.0;
  Regularization reg{};
  /// Worker count for triangle loops. 1 gives the reference sequential order.
  unsigned threads = 1;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

/// Stiffness action S_i(u) = sum_T |T| mu_T (|grad u_T|^2 + delta^2)^{(p-2)/2}
/// grad u_T . grad phi_i. Zero at boundary nodes.
NodalField p_laplacian_residual(const StepProblem& problem, std::span<const double> u);

/// Strictly convex step functional whose gradient is step_residual.
double step_energy(const StepProblem& problem, std::span<const double> u);

/// Nodal residual of the step equation; zero at boundary nodes.
NodalField step_residual(const StepProblem& problem, std::span<const double> u);

/// Linearization of step_residual at a fixed state, applied matrix-free.
///
/// The penalty term min(u,0)/kappa uses the active-set derivative: slope
/// 1/kappa where u_i < 0, zero otherwise (including u_i == 0).
class StepJacobian {
 public:
  /// Throws NumericalBreakdown if eps == 0 and some interior |u_i| < 1e-14.
  StepJacobian(const StepProblem& problem, std::span<const double> u);

  /// J w. Boundary entries of w are ignored; boundary entries of the result are 0.
  void apply(std::span<const double> w, std::span<double> out) const;
  NodalField apply(std::span<const double> w) const;

  /// Diagonal of J on interior nodes, 1 on boundary nodes.
  const NodalField& diagonal() const { return diagonal_; }

 private:
  const StructuredMesh& mesh_;
  unsigned threads_;
  NodalField nodal_;  // lumped time + penalty slope
  std::vector<std::array<double, 3>> tensors_;  // per-triangle symmetric 2x2 (xx, xy, yy), times |T|
  NodalField diagonal_;
};

/// Directional derivative of step_residual at u along w.
NodalField step_jacobian_action(const StepProblem& problem, std::span<const double> u,
                                std::span<const double> w);

/// Max over interior nodes of |F_i| / m_i.
double scaled_residual_norm(const StructuredMesh& mesh, std::span<const double> residual);

}  // namespace sia
