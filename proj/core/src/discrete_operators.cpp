#include "sia/discrete_operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "sia/errors.hpp"

namespace sia {
namespace {

/// Sums per-triangle 3-vectors into a nodal field. With several workers each
/// one owns a private accumulator; partials are added in worker order.
template <class Local>
NodalField scatter(const StructuredMesh& mesh, unsigned threads, Local&& local) {
  const std::size_t nt = mesh.num_triangles();
  auto run = [&](std::size_t begin, std::size_t end, NodalField& acc) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::array<double, 3> c = local(t);
      const auto& tri = mesh.triangle(t);
      for (std::size_t k = 0; k < 3; ++k) acc[tri[k]] += c[k];
    }
  };
  if (threads <= 1) {
    NodalField out(mesh.num_nodes(), 0.0);
    run(0, nt, out);
    return out;
  }
  std::vector<NodalField> partial(threads, NodalField(mesh.num_nodes(), 0.0));
  detail::for_each_chunk(nt, threads, [&](std::size_t b, std::size_t e, unsigned k) { run(b, e, partial[k]); });
  NodalField out = std::move(partial[0]);
  for (unsigned k = 1; k < threads; ++k)
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += partial[k][n];
  return out;
}

template <class Local>
double reduce_triangles(const StructuredMesh& mesh, unsigned threads, Local&& local) {
  const std::size_t nt = mesh.num_triangles();
  std::vector<double> partial(std::max(threads, 1u), 0.0);
  detail::for_each_chunk(nt, threads, [&](std::size_t b, std::size_t e, unsigned k) {
    double s = 0.0;
    for (std::size_t t = b; t < e; ++t) s += local(t);
    partial[k] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

void zero_boundary(const StructuredMesh& mesh, NodalField& f) {
  for (std::size_t n = 0; n < f.size(); ++n)
    if (mesh.is_boundary(n)) f[n] = 0.0;
}

void check_size(const StructuredMesh& mesh, std::span<const double> u) {
  if (u.size() != mesh.num_nodes()) throw std::invalid_argument("field size does not match mesh");
}

/// (|g|^2 + delta^2)^{(p-2)/2}, taken as 0 when the base vanishes.
double gradient_weight(Vec2 g, double delta, double p) {
  const double s = dot(g, g) + delta * delta;
  if (s == 0.0) return 0.0;
  return std::pow(s, 0.5 * (p - 2.0));
}

}  // namespace

void StepProblem::validate() const {
  if (!(ell > 0.0)) throw std::invalid_argument("time step ell must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("penalty kappa must be positive");
  if (!(reg.delta >= 0.0) || !(reg.eps >= 0.0)) throw std::invalid_argument("regularizations must be nonnegative");
  if (u_prev.size() != mesh.num_nodes() || a_bar.size() != mesh.num_nodes())
    throw std::invalid_argument("u_prev and a_bar need one value per node");
  if (params.mu.size() != mesh.num_triangles()) throw std::invalid_argument("mu needs one value per triangle");
  for (std::size_t n = 0; n < u_prev.size(); ++n) {
    if (!std::isfinite(u_prev[n]) || !std::isfinite(a_bar[n]))
      throw std::invalid_argument("non-finite data at node " + std::to_string(n));
    if (mesh.is_boundary(n) && u_prev[n] != 0.0)
      throw std::invalid_argument("u_prev must vanish on the boundary");
  }
}

NodalField p_laplacian_residual(const StepProblem& problem, std::span<const double> u) {
  const auto& mesh = problem.mesh;
  check_size(mesh, u);
  const double p = problem.params.p;
  const double delta = problem.reg.delta;
  NodalField s = scatter(mesh, problem.threads, [&](std::size_t t) {
    const Vec2 g = triangle_gradient(mesh, t, u);
    const double w = mesh.area(t) * problem.params.mu[t] * gradient_weight(g, delta, p);
    std::array<double, 3> c{};
    for (std::size_t k = 0; k < 3; ++k) c[k] = w * dot(g, mesh.basis_gradient(t, k));
    return c;
  });
  zero_boundary(mesh, s);
  return s;
}

double step_energy(const StepProblem& problem, std::span<const double> u) {
  const auto& mesh = problem.mesh;
  check_size(mesh, u);
  const double p = problem.params.p;
  const double alpha = problem.params.alpha;
  const double delta2 = problem.reg.delta * problem.reg.delta;

  const double gradient_part = reduce_triangles(mesh, problem.threads, [&](std::size_t t) {
    const Vec2 g = triangle_gradient(mesh, t, u);
    const double s = dot(g, g) + delta2;
    return mesh.area(t) * problem.params.mu[t] / p * std::pow(s, 0.5 * p);
  });

  const auto mass = mesh.lumped_mass();
  double nodal_part = 0.0;
  for (std::size_t n : mesh.interior_nodes()) {
    const double un = u[n];
    const double neg = std::min(un, 0.0);
    nodal_part += mass[n] * (phi_power_reg_potential(un, alpha, problem.reg.eps) / problem.ell -
                             phi_power_reg(problem.u_prev[n], alpha, problem.reg.eps) * un / problem.ell +
                             0.5 * neg * neg / problem.kappa - problem.a_bar[n] * un);
  }
  return nodal_part + gradient_part;
}

NodalField step_residual(const StepProblem& problem, std::span<const double> u) {
  NodalField f = p_laplacian_residual(problem, u);
  const auto& mesh = problem.mesh;
  const auto mass = mesh.lumped_mass();
  const double alpha = problem.params.alpha;
  for (std::size_t n : mesh.interior_nodes()) {
    const double time_term =
        (phi_power_reg(u[n], alpha, problem.reg.eps) - phi_power_reg(problem.u_prev[n], alpha, problem.reg.eps)) / problem.ell;
    f[n] += mass[n] * (time_term + std::min(u[n], 0.0) / problem.kappa - problem.a_bar[n]);
  }
  return f;
}

StepJacobian::StepJacobian(const StepProblem& problem, std::span<const double> u)
    : mesh_(problem.mesh), threads_(problem.threads) {
  check_size(mesh_, u);
  const double p = problem.params.p;
  const double alpha = problem.params.alpha;
  const double eps = problem.reg.eps;
  const double delta2 = problem.reg.delta * problem.reg.delta;
  const auto mass = mesh_.lumped_mass();

  nodal_.assign(mesh_.num_nodes(), 0.0);
  for (std::size_t n : mesh_.interior_nodes()) {
    if (eps == 0.0 && std::abs(u[n]) < 1e-14) {
      throw NumericalBreakdown("singular time-term derivative at node " + std::to_string(n) +
                                   " (eps = 0 and u near 0)",
                               n);
    }
    const double slope = phi_power_reg_derivative(u[n], alpha, eps) / problem.ell +
                         (u[n] < 0.0 ? 1.0 / problem.kappa : 0.0);
    nodal_[n] = mass[n] * slope;
  }

  tensors_.resize(mesh_.num_triangles());
  for (std::size_t t = 0; t < tensors_.size(); ++t) {
    const Vec2 g = triangle_gradient(mesh_, t, u);
    const double s = dot(g, g) + delta2;
    if (s == 0.0) {
      tensors_[t] = {0.0, 0.0, 0.0};
      continue;
    }
    // d/dg [ (s)^{(p-2)/2} g ] = s^{(p-2)/2} (I + (p-2) g g^T / s)
    const double w = mesh_.area(t) * problem.params.mu[t] * std::pow(s, 0.5 * (p - 2.0));
    const double c = (p - 2.0) / s;
    tensors_[t] = {w * (1.0 + c * g.x * g.x), w * c * g.x * g.y, w * (1.0 + c * g.y * g.y)};
  }

  diagonal_ = nodal_;
  for (std::size_t t = 0; t < tensors_.size(); ++t) {
    const auto& tri = mesh_.triangle(t);
    const auto& a = tensors_[t];
    for (std::size_t k = 0; k < 3; ++k) {
      const Vec2 b = mesh_.basis_gradient(t, k);
      diagonal_[tri[k]] += b.x * (a[0] * b.x + a[1] * b.y) + b.y * (a[1] * b.x + a[2] * b.y);
    }
  }
  for (std::size_t n = 0; n < diagonal_.size(); ++n)
    if (mesh_.is_boundary(n)) diagonal_[n] = 1.0;
}

void StepJacobian::apply(std::span<const double> w, std::span<double> out) const {
  auto masked = [&](std::size_t n) { return mesh_.is_boundary(n) ? 0.0 : w[n]; };
  NodalField acc = scatter(mesh_, threads_, [&](std::size_t t) {
    const auto& tri = mesh_.triangle(t);
    Vec2 g;
    for (std::size_t k = 0; k < 3; ++k) {
      const Vec2 b = mesh_.basis_gradient(t, k);
      const double wk = masked(tri[k]);
      g.x += wk * b.x;
      g.y += wk * b.y;
    }
    const auto& a = tensors_[t];
    const Vec2 flux{a[0] * g.x + a[1] * g.y, a[1] * g.x + a[2] * g.y};
    std::array<double, 3> c{};
    for (std::size_t k = 0; k < 3; ++k) c[k] = dot(flux, mesh_.basis_gradient(t, k));
    return c;
  });
  for (std::size_t n = 0; n < acc.size(); ++n)
    out[n] = mesh_.is_boundary(n) ? 0.0 : acc[n] + nodal_[n] * w[n];
}

NodalField StepJacobian::apply(std::span<const double> w) const {
  NodalField out(w.size());
  apply(w, out);
  return out;
}

NodalField step_jacobian_action(const StepProblem& problem, std::span<const double> u,
                                std::span<const double> w) {
  check_size(problem.mesh, w);
  return StepJacobian(problem, u).apply(w);
}

double scaled_residual_norm(const StructuredMesh& mesh, std::span<const double> residual) {
  const auto mass = mesh.lumped_mass();
  double r = 0.0;
  for (std::size_t n : mesh.interior_nodes()) r = std::max(r, std::abs(residual[n]) / mass[n]);
  return r;
}

}  // namespace sia
