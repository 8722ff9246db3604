#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sia/monitors.hpp"

namespace sia {

/// Manufactured solution u(t, x) = c (1 + r t) g(x) with the normalized
/// quadratic bubble g = 16 x(Lx-x) y(Ly-y) / (Lx^2 Ly^2), and the smooth
/// coefficient mu(x) = mu0 (1 + s x / Lx). u is positive inside the domain
/// for t >= 0, so the penalty never acts.
struct MmsCase {
  double amplitude = 1.0;  // c
  double rate = 1.0;       // r; 0 gives a stationary solution
  double lx = 1.0;
  double ly = 1.0;
  double mu0 = 1.0;
  double mu_slope = 0.0;   // s

  double u(double t, Vec2 x) const;
  Vec2 grad_u(double t, Vec2 x) const;
  /// (u_xx, u_xy, u_yy)
  std::array<double, 3> hessian_u(double t, Vec2 x) const;
  double mu(Vec2 x) const;
  Vec2 grad_mu(Vec2 x) const;
};

/// Source a(t, x) = d/dt(|u|^{alpha-2} u) - div(mu |grad u|^{p-2} grad u)
/// from closed-form derivatives. At critical points of u the divergence is
/// its limit (0 for p > 2, mu Laplacian u for p = 2); p < 2 there throws
/// std::domain_error.
double mms_forcing(const MmsCase& mms, double p, double t, Vec2 x);

/// PhysicalParams for the case on a mesh: mu sampled at centroids, forcing
/// from mms_forcing, u0 = u(0, .).
PhysicalParams mms_params(const MmsCase& mms, const StructuredMesh& mesh, double p);

struct MmsRow {
  std::size_t n = 0;  // nodes per axis
  int N = 0;
  double h = 0.0;
  double ell = 0.0;
  double error = 0.0;  // max_n ||u^n - u(t_n)||_{L2}, lumped
};

/// One run per (mesh size, N) pair, mesh sizes outer.
std::vector<MmsRow> mms_convergence(const MmsCase& mms, double p, const std::vector<std::size_t>& mesh_sizes,
                                    const std::vector<int>& step_counts, double T, const RunOptions& options);

/// log2(e_coarse / e_fine) for a halving of the parameter.
double observed_order(double e_coarse, double e_fine);

/// Minimizer of step_energy on a mesh with at most 9 interior nodes, by
/// backtracking gradient descent followed by coordinatewise bisection on the
/// monotone nodal residuals until max |F_i|/m_i <= 1e-11. Shares no code with
/// the Newton solver or the Krylov solve.
NodalField brute_force_step_oracle(const StepProblem& problem);

/// Root of the monotone scalar map f on an expanding bracket around x0, to
/// full double precision.
double bisect_increasing(const std::function<double(double)>& f, double x0, double width = 1.0);

struct LemmaCheck {
  std::string name;
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// For ratio checks, the smallest observed ratio; otherwise the worst
  /// relative slack (rhs - lhs) / scale.
  double extreme = 0.0;
  bool passed = false;
};

struct LemmaReport {
  std::vector<LemmaCheck> checks;
  bool passed() const;
};

/// Random-sample checks of the pointwise inequalities
///   ||x|^b - |y|^b| <= |x-y|^b                   (0 < b <= 1)
///   |x-y|^a <= ||x|^a - |y|^a|                   (x, y >= 0, a > 1)
///   (|x|^{r-2}x - |y|^{r-2}y) x >= (|x|^r - |y|^r)/r'
///   (|x|^{r-2}x - |y|^{r-2}y)(x-y) >= C (|x|^{(r-2)/2}x - |y|^{(r-2)/2}y)^2
/// with 1e-12 relative slack; the last reports the minimum ratio.
LemmaReport lemma_inequality_suite(std::size_t sample_count, std::uint64_t seed = 12345);

}  // namespace sia
