#include "sia/step_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sia/errors.hpp"

namespace sia {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void check_finite(const NodalField& f, const char* what) {
  for (std::size_t n = 0; n < f.size(); ++n) {
    if (!std::isfinite(f[n])) {
      throw NumericalBreakdown(std::string("non-finite ") + what + " at node " + std::to_string(n), n);
    }
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol_residual > 0.0)) throw std::invalid_argument("tol_residual must be positive");
  if (max_newton < 1) throw std::invalid_argument("max_newton must be at least 1");
  if (max_backtrack < 1) throw std::invalid_argument("max_backtrack must be at least 1");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw std::invalid_argument("armijo_c must lie in (0, 1)");
  if (!(cg_tol > 0.0)) throw std::invalid_argument("cg_tol must be positive");
  if (cg_max < 1) throw std::invalid_argument("cg_max must be at least 1");
}

CgResult inner_linear_solve(const LinearOperator& op, std::span<const double> diagonal,
                            std::span<const double> rhs, double cg_tol, int cg_max) {
  const std::size_t n = rhs.size();
  CgResult res;
  res.solution.assign(n, 0.0);
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) return res;

  NodalField r(rhs.begin(), rhs.end());
  NodalField z(n), p(n), ap(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diagonal[i];
  p = z;
  double rz = dot(r, z);
  auto& x = res.solution;

  for (int it = 0; it < cg_max; ++it) {
    op(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      res.status = CgStatus::indefinite;
      res.iterations = it;
      res.relative_residual = std::sqrt(dot(r, r)) / rhs_norm;
      return res;
    }
    const double step = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    const double rel = std::sqrt(dot(r, r)) / rhs_norm;
    res.iterations = it + 1;
    res.relative_residual = rel;
    if (rel <= cg_tol) return res;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diagonal[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.status = CgStatus::max_iterations;
  return res;
}

StepResult solve_step(const StepProblem& problem, const SolverConfig& config) {
  return solve_step(problem, config, problem.u_prev);
}

StepResult solve_step(const StepProblem& problem, const SolverConfig& config,
                      std::span<const double> initial_guess) {
  problem.validate();
  config.validate();
  const auto& mesh = problem.mesh;
  if (initial_guess.size() != mesh.num_nodes()) throw std::invalid_argument("initial guess size mismatch");
  for (std::size_t n = 0; n < initial_guess.size(); ++n) {
    if (mesh.is_boundary(n) && initial_guess[n] != 0.0)
      throw std::invalid_argument("initial guess must vanish on the boundary");
  }

  StepResult out;
  NodalField u(initial_guess.begin(), initial_guess.end());
  check_finite(u, "initial guess");
  NodalField f = step_residual(problem, u);
  check_finite(f, "residual");
  double energy = step_energy(problem, u);
  double res = scaled_residual_norm(mesh, f);
  out.energy_history.push_back(energy);
  out.residual_history.push_back(res);

  const std::size_t nn = u.size();
  NodalField rhs(nn), dir(nn), trial(nn);

  while (res > config.tol_residual) {
    if (out.iterations >= config.max_newton) {
      std::ostringstream msg;
      msg << "Newton iteration cap " << config.max_newton << " reached, residual " << res;
      throw NonConvergence(msg.str(), out.residual_history);
    }

    const StepJacobian jac(problem, u);
    for (std::size_t i = 0; i < nn; ++i) rhs[i] = -f[i];
    const CgResult cg = inner_linear_solve(
        [&jac](std::span<const double> in, std::span<double> o) { jac.apply(in, o); }, jac.diagonal(), rhs,
        config.cg_tol, config.cg_max);

    bool use_gradient = cg.status == CgStatus::indefinite;
    if (!use_gradient) {
      dir = cg.solution;
      use_gradient = !(dot(f, dir) < 0.0);
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (use_gradient) {
        for (std::size_t i = 0; i < nn; ++i) dir[i] = -f[i] / jac.diagonal()[i];
        ++out.gradient_fallbacks;
      }
      const double slope = dot(f, dir);
      double t = 1.0;
      for (int k = 0; k < config.max_backtrack; ++k) {
        for (std::size_t i = 0; i < nn; ++i) trial[i] = u[i] + t * dir[i];
        const double e_trial = step_energy(problem, trial);
        if (std::isfinite(e_trial)) {
          bool ok = e_trial <= energy + config.armijo_c * t * slope;
          if (!ok) {
            // Energy differences below rounding: fall back to residual decrease.
            const double noise = 64.0 * 2.2e-16 * std::max({std::abs(energy), std::abs(e_trial), 1e-300});
            if (e_trial - energy <= noise) {
              const NodalField f_trial = step_residual(problem, trial);
              ok = scaled_residual_norm(mesh, f_trial) < res;
            }
          }
          if (ok) {
            accepted = true;
            u.swap(trial);
            energy = e_trial;
            break;
          }
        }
        t *= 0.5;
        ++out.backtracks;
      }
      if (!accepted) {
        if (use_gradient) break;
        use_gradient = true;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "line search failed at Newton iteration " << out.iterations << ", residual " << res;
      throw NonConvergence(msg.str(), out.residual_history);
    }

    ++out.iterations;
    f = step_residual(problem, u);
    check_finite(f, "residual");
    res = scaled_residual_norm(mesh, f);
    out.energy_history.push_back(energy);
    out.residual_history.push_back(res);
  }

  // Entries many orders below the solution scale carry no sign information;
  // zero them when the residual test still holds.
  double scale = 0.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double floor = 1e-30 * scale;
  bool flushed = false;
  trial = u;
  for (std::size_t i = 0; i < nn; ++i) {
    if (trial[i] != 0.0 && std::abs(trial[i]) < floor) {
      trial[i] = 0.0;
      flushed = true;
    }
  }
  if (flushed) {
    const double res_flushed = scaled_residual_norm(mesh, step_residual(problem, trial));
    if (res_flushed <= config.tol_residual) {
      u.swap(trial);
      res = res_flushed;
      energy = step_energy(problem, u);
    }
  }

  out.u_next = std::move(u);
  out.final_residual = res;
  out.final_energy = energy;
  out.converged = true;
  return out;
}

}  // namespace sia
