#pragma once

#include <cmath>
#include <vector>

#include "sia/forcing.hpp"
#include "sia/geometry.hpp"

namespace sia {

// Pointwise constitutive laws. The bed is flat and there is no basal
// sliding, so the flux reduces to Q = -mu |grad u|^{p-2} grad u.

/// Exponent of the time nonlinearity, (3p - 1) / (2p). Throws for p <= 1.
double alpha_of(double p);

/// Hoelder conjugate a / (a - 1).
inline double conjugate_exponent(double a) { return a / (a - 1.0); }

/// Ice thickness H = u^{(p-1)/(2p)}. Throws for u < 0.
double thickness_from_u(double u, double p);

/// Inverse transform u = H^{2p/(p-1)}. Throws for H < 0.
double u_from_thickness(double thickness, double p);

/// Glen-law diffusion coefficient for constant softness:
/// 2 (rho g (p-1)/(2p))^{p-1} * A / (p+1).
double glen_mu(double a_const, double rho_g, double p);

/// Negative part max(-f, 0) = (|f| - f) / 2. Always >= 0.
inline double neg_part(double f) { return f < 0.0 ? -f : 0.0; }

/// |u|^{alpha-2} u, continuously extended by 0 at u = 0.
inline double phi_power(double u, double alpha) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), alpha - 1.0), u);
}

/// (u^2 + eps^2)^{(alpha-2)/2} u; equals phi_power for eps = 0.
inline double phi_power_reg(double u, double alpha, double eps) {
  if (eps == 0.0) return phi_power(u, alpha);
  return std::pow(u * u + eps * eps, 0.5 * (alpha - 2.0)) * u;
}

/// Derivative of phi_power_reg in u: (u^2+eps^2)^{(alpha-4)/2} ((alpha-1) u^2 + eps^2).
/// Unbounded at u = 0 when eps = 0 (returns +inf there).
inline double phi_power_reg_derivative(double u, double alpha, double eps) {
  const double s = u * u + eps * eps;
  if (s == 0.0) return INFINITY;
  return std::pow(s, 0.5 * (alpha - 4.0)) * ((alpha - 1.0) * u * u + eps * eps);
}

/// Antiderivative of phi_power_reg vanishing at 0: ((u^2+eps^2)^{alpha/2} - eps^alpha) / alpha.
inline double phi_power_reg_potential(double u, double alpha, double eps) {
  if (eps == 0.0) return std::pow(std::abs(u), alpha) / alpha;
  // expm1/log1p form: no cancellation for |u| << eps, exactly 0 at u = 0
  const double r = u / eps;
  return std::pow(eps, alpha) * std::expm1(0.5 * alpha * std::log1p(r * r)) / alpha;
}

/// Physical parameters of one configuration. mu is piecewise constant per
/// triangle and must lie in [mu1, mu2].
struct PhysicalParams {
  double p = 3.0;
  double alpha = alpha_of(3.0);
  double rho_g = 0.0;
  double a_const = 0.0;
  std::vector<double> mu;
  double mu1 = 0.0;
  double mu2 = 0.0;
  Forcing forcing;
  NodalField u0;

  /// Constant mu on every triangle; mu1 = mu2 = mu.
  static PhysicalParams uniform(const StructuredMesh& mesh, double p, double mu, Forcing forcing,
                                NodalField u0);

  /// Throws std::invalid_argument on violated invariants; warns for p outside
  /// [2.8, 5] and for u0 identically zero.
  void validate(const StructuredMesh& mesh) const;
};

/// Per-triangle flux Q_T = -mu_T |grad u_T|^{p-2} grad u_T.
std::vector<Vec2> diagnostic_flux(const StructuredMesh& mesh, std::span<const double> u,
                                  const PhysicalParams& params);

}  // namespace sia
