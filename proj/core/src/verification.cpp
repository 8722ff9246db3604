#include "sia/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sia {

// ---------------------------------------------------------------------------
// Manufactured solution

namespace {

struct Bubble {
  double k, X, Y, dX, dY;
};

Bubble bubble(const MmsCase& c, Vec2 x) {
  return {16.0 / (c.lx * c.lx * c.ly * c.ly), x.x * (c.lx - x.x), x.y * (c.ly - x.y), c.lx - 2.0 * x.x,
          c.ly - 2.0 * x.y};
}

}  // namespace

double MmsCase::u(double t, Vec2 x) const {
  const Bubble b = bubble(*this, x);
  return amplitude * (1.0 + rate * t) * b.k * b.X * b.Y;
}

Vec2 MmsCase::grad_u(double t, Vec2 x) const {
  const Bubble b = bubble(*this, x);
  const double s = amplitude * (1.0 + rate * t) * b.k;
  return {s * b.dX * b.Y, s * b.X * b.dY};
}

std::array<double, 3> MmsCase::hessian_u(double t, Vec2 x) const {
  const Bubble b = bubble(*this, x);
  const double s = amplitude * (1.0 + rate * t) * b.k;
  return {-2.0 * s * b.Y, s * b.dX * b.dY, -2.0 * s * b.X};
}

double MmsCase::mu(Vec2 x) const { return mu0 * (1.0 + mu_slope * x.x / lx); }

Vec2 MmsCase::grad_mu(Vec2) const { return {mu0 * mu_slope / lx, 0.0}; }

double mms_forcing(const MmsCase& mms, double p, double t, Vec2 x) {
  const double alpha = alpha_of(p);
  const double u = mms.u(t, x);

  // d/dt (u^{alpha-1}) for u = c (1 + r t) g >= 0
  double time_term = 0.0;
  if (u > 0.0 && mms.rate != 0.0) {
    const double g = u / (mms.amplitude * (1.0 + mms.rate * t));
    time_term = (alpha - 1.0) * std::pow(mms.amplitude, alpha - 1.0) * mms.rate *
                std::pow(1.0 + mms.rate * t, alpha - 2.0) * std::pow(g, alpha - 1.0);
  }

  const Vec2 gu = mms.grad_u(t, x);
  const auto h = mms.hessian_u(t, x);
  const double norm2 = dot(gu, gu);
  const double mu = mms.mu(x);
  double divergence = 0.0;
  if (norm2 == 0.0) {
    if (p < 2.0) throw std::domain_error("p-Laplacian source singular at a critical point for p < 2");
    if (p == 2.0) divergence = mu * (h[0] + h[2]);
  } else {
    const double norm = std::sqrt(norm2);
    const double laplacian = h[0] + h[2];
    const double quad = gu.x * (h[0] * gu.x + h[1] * gu.y) + gu.y * (h[1] * gu.x + h[2] * gu.y);
    divergence = mu * (std::pow(norm, p - 2.0) * laplacian + (p - 2.0) * std::pow(norm, p - 4.0) * quad) +
                 std::pow(norm, p - 2.0) * dot(gu, mms.grad_mu(x));
  }
  return time_term - divergence;
}

PhysicalParams mms_params(const MmsCase& mms, const StructuredMesh& mesh, double p) {
  PhysicalParams params;
  params.p = p;
  params.alpha = alpha_of(p);
  params.mu.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < params.mu.size(); ++t) params.mu[t] = mms.mu(mesh.centroid(t));
  params.mu1 = *std::min_element(params.mu.begin(), params.mu.end());
  params.mu2 = *std::max_element(params.mu.begin(), params.mu.end());
  params.forcing = Forcing(FunctionForcing{[mms, p](double t, Vec2 x) { return mms_forcing(mms, p, t, x); },
                                           "manufactured"});
  params.u0 = sample(mesh, [&mms](Vec2 x) { return mms.u(0.0, x); });
  for (std::size_t n = 0; n < params.u0.size(); ++n)
    if (mesh.is_boundary(n)) params.u0[n] = 0.0;
  return params;
}

std::vector<MmsRow> mms_convergence(const MmsCase& mms, double p, const std::vector<std::size_t>& mesh_sizes,
                                    const std::vector<int>& step_counts, double T, const RunOptions& options) {
  std::vector<MmsRow> rows;
  for (std::size_t n : mesh_sizes) {
    const StructuredMesh mesh = StructuredMesh::build(n, n, mms.lx, mms.ly);
    const PhysicalParams params = mms_params(mms, mesh, p);
    for (int N : step_counts) {
      const TimeGrid grid{T, N};
      const Trajectory traj = run(mesh, params, grid, options);
      MmsRow row{n, N, mesh.hx(), grid.ell(), 0.0};
      for (int k = 0; k <= N; ++k) {
        const double t = grid.time(k);
        NodalField e = traj.state(k);
        for (std::size_t i = 0; i < e.size(); ++i) e[i] -= mesh.is_boundary(i) ? 0.0 : mms.u(t, mesh.node(i));
        row.error = std::max(row.error, lq_norm(mesh, e, 2.0));
      }
      rows.push_back(row);
    }
  }
  return rows;
}

double observed_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

// ---------------------------------------------------------------------------
// Brute-force step oracle

double bisect_increasing(const std::function<double(double)>& f, double x0, double width) {
  double lo = x0 - width;
  double hi = x0 + width;
  double f_lo = f(lo);
  double f_hi = f(hi);
  for (int k = 0; f_lo > 0.0 && k < 2000; ++k) {
    hi = lo;
    width *= 2.0;
    lo -= width;
    f_lo = f(lo);
  }
  for (int k = 0; f_hi < 0.0 && k < 2000; ++k) {
    lo = hi;
    width *= 2.0;
    hi += width;
    f_hi = f(hi);
  }
  if (f_lo > 0.0 || f_hi < 0.0) throw std::runtime_error("bisection failed to bracket a root");
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? lo : hi) = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

namespace {

/// Nodal residual and energy of the step problem written out node by node,
/// independent of the assembled operators.
class LocalStepModel {
 public:
  explicit LocalStepModel(const StepProblem& pb) : pb_(pb), incident_(pb.mesh.num_nodes()) {
    for (std::size_t t = 0; t < pb.mesh.num_triangles(); ++t)
      for (std::size_t k = 0; k < 3; ++k) incident_[pb.mesh.triangle(t)[k]].push_back({t, k});
  }

  double residual(const NodalField& u, std::size_t i) const {
    const auto& mesh = pb_.mesh;
    const double p = pb_.params.p;
    const double d2 = pb_.reg.delta * pb_.reg.delta;
    double s = 0.0;
    for (auto [t, k] : incident_[i]) {
      const auto& tri = mesh.triangle(t);
      Vec2 g;
      for (std::size_t j = 0; j < 3; ++j) {
        const Vec2 b = mesh.basis_gradient(t, j);
        g.x += u[tri[j]] * b.x;
        g.y += u[tri[j]] * b.y;
      }
      const double base = g.x * g.x + g.y * g.y + d2;
      if (base == 0.0) continue;
      const Vec2 b = mesh.basis_gradient(t, k);
      s += mesh.area(t) * pb_.params.mu[t] * std::pow(base, 0.5 * (p - 2.0)) * (g.x * b.x + g.y * b.y);
    }
    const double alpha = pb_.params.alpha;
    const double m = mesh.lumped_mass()[i];
    const double ui = u[i];
    const auto phi = [&](double v) {
      return pb_.reg.eps == 0.0 ? phi_power(v, alpha) : std::pow(v * v + pb_.reg.eps * pb_.reg.eps, 0.5 * (alpha - 2.0)) * v;
    };
    return s + m * ((phi(ui) - phi(pb_.u_prev[i])) / pb_.ell + std::min(ui, 0.0) / pb_.kappa -
                    pb_.a_bar[i]);
  }

  double scaled_max(const NodalField& u) const {
    double r = 0.0;
    for (std::size_t i : pb_.mesh.interior_nodes())
      r = std::max(r, std::abs(residual(u, i)) / pb_.mesh.lumped_mass()[i]);
    return r;
  }

 private:
  const StepProblem& pb_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incident_;
};

}  // namespace

NodalField brute_force_step_oracle(const StepProblem& problem) {
  problem.validate();
  const auto& mesh = problem.mesh;
  if (mesh.interior_nodes().size() > 9) throw std::invalid_argument("oracle limited to at most 9 interior nodes");

  const LocalStepModel model(problem);
  const auto interior = mesh.interior_nodes();
  const auto mass = mesh.lumped_mass();
  NodalField u = problem.u_prev;

  // Phase 1: gradient descent on the energy with backtracking.
  NodalField grad(u.size(), 0.0), trial(u.size());
  double step = 1.0;
  double energy = step_energy(problem, u);
  for (int it = 0; it < 5000; ++it) {
    double gmax = 0.0;
    double g2 = 0.0;
    for (std::size_t i : interior) {
      grad[i] = model.residual(u, i) / mass[i];
      gmax = std::max(gmax, std::abs(grad[i]));
      g2 += mass[i] * grad[i] * grad[i];
    }
    if (gmax < 1e-6) break;
    step *= 4.0;
    for (int k = 0; k < 200; ++k) {
      trial = u;
      for (std::size_t i : interior) trial[i] -= step * grad[i];
      const double e = step_energy(problem, trial);
      if (e <= energy - 1e-4 * step * g2) {
        u.swap(trial);
        energy = e;
        break;
      }
      step *= 0.5;
    }
  }

  // Phase 2: nonlinear Gauss-Seidel, each nodal equation solved by bisection.
  for (int sweep = 0; sweep < 200000; ++sweep) {
    if (model.scaled_max(u) <= 1e-11) break;
    for (std::size_t i : interior) {
      const double x0 = u[i];
      u[i] = bisect_increasing(
          [&](double x) {
            const double keep = u[i];
            u[i] = x;
            const double r = model.residual(u, i);
            u[i] = keep;
            return r;
          },
          x0, std::max(1e-3, 1e-3 * std::abs(x0)));
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Pointwise lemma checks

bool LemmaReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.passed; });
}

LemmaReport lemma_inequality_suite(std::size_t sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be at least 1");
  constexpr double slack = 1e-12;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto symmetric = [&] { return -1e3 + 2e3 * unit(rng); };
  auto nonneg = [&] { return 1e3 * unit(rng); };

  LemmaReport report;

  // Upper bound: ||x|^b - |y|^b| <= |x - y|^b.
  {
    LemmaCheck c{"holder_continuity_of_power", sample_count, 0, 0.0, false};
    double worst = INFINITY;
    for (std::size_t s = 0; s < sample_count; ++s) {
      const double b = 1.0 - unit(rng);  // (0, 1]
      const double x = symmetric(), y = symmetric();
      const double lhs = std::abs(std::pow(std::abs(x), b) - std::pow(std::abs(y), b));
      const double rhs = std::pow(std::abs(x - y), b);
      const double scale = std::max({lhs, rhs, 1e-300});
      worst = std::min(worst, (rhs - lhs) / scale);
      if (lhs > rhs + slack * scale) ++c.violations;
    }
    c.extreme = worst;
    c.passed = c.violations == 0;
    report.checks.push_back(c);
  }

  // Lower bound: |x - y|^a <= ||x|^a - |y|^a| for x, y >= 0.
  {
    LemmaCheck c{"superadditivity_of_power", sample_count, 0, 0.0, false};
    double worst = INFINITY;
    for (std::size_t s = 0; s < sample_count; ++s) {
      const double a = 4.0 - 3.0 * unit(rng);  // (1, 4]
      const double x = nonneg(), y = nonneg();
      const double lhs = std::pow(std::abs(x - y), a);
      const double rhs = std::abs(std::pow(x, a) - std::pow(y, a));
      const double scale = std::max({lhs, rhs, 1e-300});
      worst = std::min(worst, (rhs - lhs) / scale);
      if (lhs > rhs + slack * scale) ++c.violations;
    }
    c.extreme = worst;
    c.passed = c.violations == 0;
    report.checks.push_back(c);
  }

  std::vector<double> rs(sample_count), xs(sample_count), ys(sample_count);
  for (std::size_t s = 0; s < sample_count; ++s) {
    rs[s] = 6.0 - 5.0 * unit(rng);  // (1, 6]
    xs[s] = symmetric();
    ys[s] = symmetric();
  }

  // (phi(x) - phi(y)) x >= (|x|^r - |y|^r) / r'.
  {
    LemmaCheck c{"young_lower_bound", sample_count, 0, 0.0, false};
    double worst = INFINITY;
    for (std::size_t s = 0; s < sample_count; ++s) {
      const double r = rs[s], x = xs[s], y = ys[s];
      const double px = signed_power(x, r - 1.0), py = signed_power(y, r - 1.0);
      const double ax = std::pow(std::abs(x), r), ay = std::pow(std::abs(y), r);
      const double rc = conjugate_exponent(r);
      const double lhs = (px - py) * x;
      const double rhs = (ax - ay) / rc;
      const double scale = std::max({std::abs(px * x), std::abs(py * x), ax / rc, ay / rc, 1e-300});
      worst = std::min(worst, (lhs - rhs) / scale);
      if (lhs < rhs - slack * scale) ++c.violations;
    }
    c.extreme = worst;
    c.passed = c.violations == 0;
    report.checks.push_back(c);
  }

  // (phi(x) - phi(y))(x - y) / (psi(x) - psi(y))^2 > 0, psi = |.|^{(r-2)/2} .
  {
    LemmaCheck c{"half_power_monotonicity_ratio", sample_count, 0, 0.0, false};
    double min_ratio = INFINITY;
    for (std::size_t s = 0; s < sample_count; ++s) {
      const double r = rs[s], x = xs[s], y = ys[s];
      const double num = (signed_power(x, r - 1.0) - signed_power(y, r - 1.0)) * (x - y);
      const double d = signed_power(x, 0.5 * r) - signed_power(y, 0.5 * r);
      if (d == 0.0) continue;
      const double ratio = num / (d * d);
      if (!(ratio > 0.0)) ++c.violations;
      min_ratio = std::min(min_ratio, ratio);
    }
    c.extreme = min_ratio;
    c.passed = c.violations == 0 && min_ratio > 0.0;
    report.checks.push_back(c);
  }
  return report;
}

}  // namespace sia
