#include "sia/physics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "sia/errors.hpp"

namespace sia {

double alpha_of(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("Glen exponent p must exceed 1");
  return (3.0 * p - 1.0) / (2.0 * p);
}

double thickness_from_u(double u, double p) {
  if (u < 0.0) throw std::invalid_argument("u must be nonnegative");
  if (!(p > 1.0)) throw std::invalid_argument("Glen exponent p must exceed 1");
  return std::pow(u, (p - 1.0) / (2.0 * p));
}

double u_from_thickness(double thickness, double p) {
  if (thickness < 0.0) throw std::invalid_argument("thickness must be nonnegative");
  if (!(p > 1.0)) throw std::invalid_argument("Glen exponent p must exceed 1");
  return std::pow(thickness, 2.0 * p / (p - 1.0));
}

double glen_mu(double a_const, double rho_g, double p) {
  if (!(a_const > 0.0)) throw std::invalid_argument("softness A must be positive");
  if (!(rho_g > 0.0)) throw std::invalid_argument("rho*g must be positive");
  if (!(p > 1.0)) throw std::invalid_argument("Glen exponent p must exceed 1");
  // int_0^1 (1-s)^p ds = 1/(p+1) for depth-independent A.
  return 2.0 * std::pow(rho_g * (p - 1.0) / (2.0 * p), p - 1.0) * a_const / (p + 1.0);
}

PhysicalParams PhysicalParams::uniform(const StructuredMesh& mesh, double p, double mu,
                                       Forcing forcing, NodalField u0) {
  PhysicalParams params;
  params.p = p;
  params.alpha = alpha_of(p);
  params.mu.assign(mesh.num_triangles(), mu);
  params.mu1 = mu;
  params.mu2 = mu;
  params.forcing = std::move(forcing);
  params.u0 = std::move(u0);
  return params;
}

void PhysicalParams::validate(const StructuredMesh& mesh) const {
  const double expected_alpha = alpha_of(p);
  if (alpha != expected_alpha) throw std::invalid_argument("alpha inconsistent with p");
  if (p < 2.8 || p > 5.0) {
    std::ostringstream msg;
    msg << "p = " << p << " lies outside the glaciological range [2.8, 5]";
    warn(msg.str());
  }
  if (!(mu1 > 0.0) || mu2 < mu1) throw std::invalid_argument("mu bounds must satisfy 0 < mu1 <= mu2");
  if (mu.size() != mesh.num_triangles()) throw std::invalid_argument("mu needs one value per triangle");
  for (std::size_t t = 0; t < mu.size(); ++t) {
    if (!(mu[t] >= mu1 && mu[t] <= mu2)) {
      throw std::invalid_argument("mu on triangle " + std::to_string(t) + " outside [mu1, mu2]");
    }
  }
  if (u0.size() != mesh.num_nodes()) throw std::invalid_argument("u0 needs one value per node");
  bool all_zero = true;
  for (std::size_t n = 0; n < u0.size(); ++n) {
    if (!std::isfinite(u0[n]) || u0[n] < 0.0) {
      throw std::invalid_argument("u0 must be finite and nonnegative (node " + std::to_string(n) + ")");
    }
    if (mesh.is_boundary(n) && u0[n] != 0.0) {
      throw std::invalid_argument("u0 must vanish on the boundary (node " + std::to_string(n) + ")");
    }
    all_zero = all_zero && u0[n] == 0.0;
  }
  if (all_zero) warn("initial datum u0 is identically zero");
  forcing.validate(mesh);
}

std::vector<Vec2> diagnostic_flux(const StructuredMesh& mesh, std::span<const double> u,
                                  const PhysicalParams& params) {
  std::vector<Vec2> q(mesh.num_triangles());
  for (std::size_t t = 0; t < q.size(); ++t) {
    const Vec2 g = triangle_gradient(mesh, t, u);
    const double norm = std::sqrt(dot(g, g));
    const double w = norm == 0.0 ? 0.0 : params.mu[t] * std::pow(norm, params.p - 2.0);
    q[t] = {-w * g.x, -w * g.y};
  }
  return q;
}

}  // namespace sia
