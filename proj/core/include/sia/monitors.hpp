#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sia/time_integrator.hpp"

namespace sia {

// Discrete norms on the lumped mesh:
//   ||v||_{Lq}^q  = sum_i m_i |v_i|^q
//   ||v||_{W1p}^p = sum_T |T| |grad v_T|^p   (seminorm; a norm on zero-boundary fields)
double lq_norm(const StructuredMesh& mesh, std::span<const double> v, double q);
double w1p_norm(const StructuredMesh& mesh, std::span<const double> v, double p);

/// sign(u) |u|^e, with 0 at u = 0.
double signed_power(double u, double e);

/// Discrete counterparts of the a priori bounds of the penalized march,
/// plus the stability-condition checks.
struct MonitorRecord {
  double est1 = 0.0;    // max_n ||u^n||_{L^alpha}
  double est2 = 0.0;    // ell sum_{n=0}^N ||u^n||_{W1p}^p
  double est3 = 0.0;    // ell sum_{n<N} ||D_ell(|u|^{(alpha-2)/2} u)||_{L2}^2
  double est3_1 = 0.0;  // max_n |||u^n|^{(alpha-2)/2} u^n||_{L2}
  double est4 = 0.0;    // max_n ||u^n||_{W1p}
  double est5_1 = 0.0;  // max_n |||u^n|^{alpha-2} u^n||_{L^alpha'}
  double pen_sum = 0.0;  // (ell/kappa) sum_{n=1}^N ||{u^n}^-||_{L2}^2
  double sc1_value = 0.0;
  bool sc1_prime_ok = true;
  double sc2_prime_value = 0.0;  // max_n ||{u^n}^-||_{L2} / kappa
  double neg_norm = 0.0;         // ||{u}^-||_{L2(0,T;L2)} of the piecewise-constant interpolant
};

/// Requires a trajectory starting at step 0. Uses traj.meta for p, alpha, kappa.
MonitorRecord compute_monitors(const StructuredMesh& mesh, const Trajectory& traj);

/// (1/kappa) sum_n sum_i m_i {u^{n+1}_i}^- (u^{n+1}_i - u^n_i).
double check_sc1(const StructuredMesh& mesh, const Trajectory& traj, double kappa);

struct Sc1PrimeReport {
  bool ok = true;
  int step = -1;          // first n with a violation on the pair (u^n, u^{n+1})
  std::size_t node = 0;
};

/// Nodewise {u^{n+1}}^- >= {u^n}^- - 1e-12 for every stored pair.
Sc1PrimeReport check_sc1_prime(const Trajectory& traj);

/// Test field of the limiting variational inequality, sampled at slab midpoints.
struct TestField {
  std::string name;
  std::function<NodalField(double)> at;
};

/// Discrete variational-inequality defect LHS - RHS for each test field.
/// The time-derivative pairing is the telescoping sum of phi increments
/// against v(t_{n+1/2}); the elliptic term is exact per triangle.
/// Throws std::invalid_argument if a field is negative somewhere or
/// nonzero on the boundary.
std::vector<double> vi_defects(const StructuredMesh& mesh, const PhysicalParams& params, const Trajectory& traj,
                               const std::vector<TestField>& family);

/// Minimum over the family of vi_defects.
double vi_residual(const StructuredMesh& mesh, const PhysicalParams& params, const Trajectory& traj,
                   const std::vector<TestField>& family);

/// Ten nonnegative fields: v = u^+, scaled copies, u^+ plus fixed and
/// oscillating bumps, v = 0 and pure bumps.
std::vector<TestField> standard_test_family(const StructuredMesh& mesh, const Trajectory& traj);

struct SweepRow {
  double kappa = 0.0;
  bool ok = false;
  std::string error;
  double neg_norm = 0.0;
  double neg_norm_over_kappa = 0.0;
  MonitorRecord monitors;
  /// max_i |u_kappa(T) - u_{kappa_prev}(T)|; NaN on the first row or after a failure.
  double distance_to_previous = std::numeric_limits<double>::quiet_NaN();
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// neg_norm(kappa_{k+1}) <= 1.05 neg_norm(kappa_k) for successive successful rows.
  bool neg_norm_nonincreasing = true;
  /// Filled when requested; one per row (empty trajectory for failed rows).
  std::vector<Trajectory> trajectories;
};

/// Runs the march for each kappa (strictly decreasing, positive). Row
/// failures are recorded and the sweep continues. Rows may run on up to
/// `jobs` threads; results do not depend on `jobs`.
SweepTable kappa_sweep(const StructuredMesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
                       const RunOptions& base, const std::vector<double>& kappas, bool keep_trajectories = false,
                       unsigned jobs = 1);

/// log(neg_k / neg_{k+1}) / log(kappa_k / kappa_{k+1}) for successive rows.
std::vector<double> neg_norm_decay_orders(const SweepTable& table);

}  // namespace sia
