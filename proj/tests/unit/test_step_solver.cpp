#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sia/errors.hpp"
#include "sia/step_solver.hpp"
#include "sia/verification.hpp"
#include "support.hpp"

using namespace sia;

namespace {

struct Fixture {
  StructuredMesh mesh;
  PhysicalParams params;
  Fixture(std::size_t n, double p, double mu = 1.0)
      : mesh(StructuredMesh::build(n, n, 1.0, 1.0)),
        params(PhysicalParams::uniform(mesh, p, mu, Forcing{}, mesh.zero_field())) {}
};

// Centre value of the one-interior-node step on the unit square, by
// bisection on the scalar equation summed directly over the hat's triangles.
double scalar_step_oracle(double p, double kappa, double a, double ell) {
  const auto mesh = StructuredMesh::build(3, 3, 1.0, 1.0);
  const double alpha = alpha_of(p);
  const double m = 0.25;
  // Stiffness of the centre hat on its own: sum over incident triangles.
  const std::size_t c = mesh.node_index(1, 1);
  auto S = [&](double val) {
    double s = 0.0;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tri = mesh.triangle(t);
      for (std::size_t k = 0; k < 3; ++k) {
        if (tri[k] != c) continue;
        const Vec2 g = mesh.basis_gradient(t, k);
        const double gx = val * g.x, gy = val * g.y;
        const double norm2 = gx * gx + gy * gy;
        s += mesh.area(t) * std::pow(norm2, 0.5 * (p - 2.0)) * (gx * g.x + gy * g.y);
      }
    }
    return s;
  };
  return bisect_increasing(
      [&](double x) { return m / ell * phi_power(x, alpha) + S(x) + m / kappa * std::min(x, 0.0) - m * a; }, 0.0);
}

}  // namespace

TEST(SolveStep, ZeroProblemTakesNoIterations) {
  const Fixture f(9, 3.0);
  const auto z = f.mesh.zero_field();
  const StepProblem pb{f.mesh, f.params, z, z, 0.1, 1e-3};
  const auto r = solve_step(pb, SolverConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.final_residual, 0.0);
  for (double v : r.u_next) EXPECT_EQ(v, 0.0);
}

TEST(SolveStep, ScalarBisectionOracle) {
  const Fixture f(3, 3.0);
  const auto z = f.mesh.zero_field();
  NodalField a = z;
  const std::size_t c = f.mesh.node_index(1, 1);
  a[c] = 1.0;
  const StepProblem pb{f.mesh, f.params, z, a, 1.0, 1.0, {0.0, 0.0}};
  // eps = 0 is singular at the warm start u = 0; start from a positive guess.
  NodalField guess = z;
  guess[c] = 0.5;
  const auto r = solve_step(pb, SolverConfig{}, guess);
  EXPECT_NEAR(r.u_next[c], scalar_step_oracle(3.0, 1.0, 1.0, 1.0), 1e-8);
}

TEST(SolveStep, DownwardForcingScalesWithKappa) {
  const Fixture f(3, 3.0);
  const auto z = f.mesh.zero_field();
  NodalField a = z;
  const std::size_t c = f.mesh.node_index(1, 1);
  a[c] = -1.0;
  std::vector<double> values;
  for (double kappa : {1e-1, 1e-2, 1e-3}) {
    const StepProblem pb{f.mesh, f.params, z, a, 1.0, kappa};
    const auto r = solve_step(pb, SolverConfig{});
    const double oracle = scalar_step_oracle(3.0, kappa, -1.0, 1.0);
    EXPECT_NEAR(r.u_next[c], oracle, 1e-8 * std::max(1.0, std::abs(oracle)) + 1e-9);
    EXPECT_LE(r.u_next[c], 0.0);
    EXPECT_GT(r.u_next[c], -kappa * 1.0);
    values.push_back(r.u_next[c]);
  }
  // Linear in kappa within a factor two per decade.
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double ratio = values[k] / values[k + 1];
    EXPECT_GT(ratio, 5.0);
    EXPECT_LT(ratio, 20.0);
  }
}

TEST(SolveStep, UniqueAcrossInitialGuesses) {
  const Fixture f(9, 3.0);
  std::mt19937_64 rng(77);
  const auto prev = test::random_field(f.mesh, rng, 0.0, 1.0);
  const auto abar = test::random_field(f.mesh, rng, -2.0, 2.0);
  const StepProblem pb{f.mesh, f.params, prev, abar, 0.05, 1e-2};
  const SolverConfig cfg;
  const auto ref = solve_step(pb, cfg);
  for (int k = 0; k < 8; ++k) {
    const auto guess = test::random_field(f.mesh, rng, -3.0, 3.0);
    const auto r = solve_step(pb, cfg, guess);
    for (std::size_t i = 0; i < ref.u_next.size(); ++i)
      EXPECT_NEAR(r.u_next[i], ref.u_next[i], 10 * cfg.tol_residual);
  }
}

TEST(SolveStep, EnergyDescendsAndMatchesOracle) {
  const Fixture f(5, 2.8);
  std::mt19937_64 rng(3);
  const auto prev = test::random_field(f.mesh, rng, 0.0, 1.0);
  const auto abar = test::random_field(f.mesh, rng, -1.0, 1.0);
  const StepProblem pb{f.mesh, f.params, prev, abar, 0.2, 1e-1};
  const auto r = solve_step(pb, SolverConfig{});
  ASSERT_TRUE(r.converged);
  for (std::size_t k = 1; k < r.energy_history.size(); ++k) EXPECT_LE(r.energy_history[k], r.energy_history[k - 1]);
  EXPECT_LE(r.final_residual, SolverConfig{}.tol_residual);
  const auto oracle = brute_force_step_oracle(pb);
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_NEAR(r.u_next[i], oracle[i], 1e-9);
  EXPECT_LE(r.final_energy, step_energy(pb, oracle) + 1e-12 * (1.0 + std::abs(r.final_energy)));
}

TEST(SolveStep, ThrowsNonConvergenceWithHistory) {
  const Fixture f(9, 5.0);
  std::mt19937_64 rng(4);
  const auto prev = test::random_field(f.mesh, rng, 0.0, 1.0);
  const auto abar = test::random_field(f.mesh, rng, -1.0, 1.0);
  const StepProblem pb{f.mesh, f.params, prev, abar, 0.1, 1e-4};
  SolverConfig cfg;
  cfg.max_newton = 1;
  try {
    solve_step(pb, cfg, test::random_field(f.mesh, rng, -3.0, 3.0));
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GE(e.residual_history().size(), 1u);
  }
}

TEST(SolveStep, RejectsBadGuessAndConfig) {
  const Fixture f(4, 3.0);
  const auto z = f.mesh.zero_field();
  const StepProblem pb{f.mesh, f.params, z, z, 0.1, 1e-3};
  NodalField guess = z;
  guess[0] = 1.0;
  EXPECT_THROW(solve_step(pb, SolverConfig{}, guess), std::invalid_argument);
  SolverConfig cfg;
  cfg.armijo_c = 1.5;
  EXPECT_THROW(solve_step(pb, cfg), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.tol_residual = 0.0;
  EXPECT_THROW(solve_step(pb, cfg), std::invalid_argument);
  NodalField nan_guess = z;
  nan_guess[f.mesh.node_index(1, 1)] = std::nan("");
  EXPECT_THROW(solve_step(pb, SolverConfig{}, nan_guess), NumericalBreakdown);
}

TEST(InnerLinearSolve, ZeroRhs) {
  const Fixture f(5, 3.0);
  const auto z = f.mesh.zero_field();
  const StepProblem pb{f.mesh, f.params, z, z, 0.1, 1e-3};
  NodalField u = z;
  for (std::size_t i : f.mesh.interior_nodes()) u[i] = 0.3;
  const StepJacobian jac(pb, u);
  const auto r = inner_linear_solve([&](auto in, auto out) { jac.apply(in, out); }, jac.diagonal(), z, 1e-10, 100);
  EXPECT_EQ(r.status, CgStatus::converged);
  for (double v : r.solution) EXPECT_EQ(v, 0.0);
}

TEST(InnerLinearSolve, MatchesDenseFactorization) {
  for (std::size_t n : {3u, 6u}) {
    const Fixture f(n, 2.0);
    std::mt19937_64 rng(n);
    const auto prev = test::random_field(f.mesh, rng, 0.0, 1.0);
    const StepProblem pb{f.mesh, f.params, prev, f.mesh.zero_field(), 0.1, 1e-2};
    const auto u = test::random_field(f.mesh, rng, 0.1, 1.0);
    const StepJacobian jac(pb, u);
    const auto interior = f.mesh.interior_nodes();
    const Eigen::Index k = static_cast<Eigen::Index>(interior.size());
    Eigen::MatrixXd A(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      NodalField e = f.mesh.zero_field();
      e[interior[c]] = 1.0;
      const auto col = jac.apply(e);
      for (Eigen::Index r = 0; r < k; ++r) A(r, c) = col[interior[r]];
    }
    const auto rhs_field = test::random_field(f.mesh, rng, -1.0, 1.0);
    Eigen::VectorXd b(k);
    for (Eigen::Index r = 0; r < k; ++r) b(r) = rhs_field[interior[r]];
    const Eigen::VectorXd x = A.llt().solve(b);
    const auto res = inner_linear_solve([&](auto in, auto out) { jac.apply(in, out); }, jac.diagonal(), rhs_field,
                                        1e-14, 1000);
    EXPECT_EQ(res.status, CgStatus::converged);
    for (Eigen::Index r = 0; r < k; ++r) EXPECT_NEAR(res.solution[interior[r]], x(r), 1e-10 * (1.0 + std::abs(x(r))));
  }
}

TEST(InnerLinearSolve, DiagonalDominantCase) {
  // Large nodal block: the solve is essentially a diagonal scaling.
  const Fixture f(6, 3.0);
  const auto z = f.mesh.zero_field();
  const StepProblem pb{f.mesh, f.params, z, z, 1e-12, 1e12, {0.0, 1e-10}};
  NodalField u = z;
  for (std::size_t i : f.mesh.interior_nodes()) u[i] = 1.0;
  const StepJacobian jac(pb, u);
  std::mt19937_64 rng(2);
  const auto rhs = test::random_field(f.mesh, rng, -1.0, 1.0);
  const auto r = inner_linear_solve([&](auto in, auto out) { jac.apply(in, out); }, jac.diagonal(), rhs, 1e-12, 100);
  for (std::size_t i : f.mesh.interior_nodes()) EXPECT_NEAR(r.solution[i], rhs[i] / jac.diagonal()[i], 1e-8 * std::abs(rhs[i] / jac.diagonal()[i]));
}

TEST(InnerLinearSolve, ReportsIndefinite) {
  const std::vector<double> diag{1.0, 1.0};
  const LinearOperator op = [](std::span<const double> in, std::span<double> out) {
    out[0] = -in[0];
    out[1] = -in[1];
  };
  const std::vector<double> rhs{1.0, 0.5};
  EXPECT_EQ(inner_linear_solve(op, diag, rhs, 1e-10, 10).status, CgStatus::indefinite);
}
