#include "sia/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <stdexcept>

namespace sia {

double lq_norm(const StructuredMesh& mesh, std::span<const double> v, double q) {
  const auto mass = mesh.lumped_mass();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += mass[i] * std::pow(std::abs(v[i]), q);
  return std::pow(s, 1.0 / q);
}

double w1p_norm(const StructuredMesh& mesh, std::span<const double> v, double p) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Vec2 g = triangle_gradient(mesh, t, v);
    s += mesh.area(t) * std::pow(std::sqrt(dot(g, g)), p);
  }
  return std::pow(s, 1.0 / p);
}

double signed_power(double u, double e) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), e), u);
}

namespace {

double neg_l2_squared(const StructuredMesh& mesh, const NodalField& u) {
  const auto mass = mesh.lumped_mass();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double m = neg_part(u[i]);
    s += mass[i] * m * m;
  }
  return s;
}

void require_full(const Trajectory& traj) {
  if (traj.first_step != 0 || traj.last_step() != traj.time_grid.N)
    throw std::invalid_argument("monitors need a complete trajectory u^0 .. u^N");
}

}  // namespace

double check_sc1(const StructuredMesh& mesh, const Trajectory& traj, double kappa) {
  const auto mass = mesh.lumped_mass();
  double s = 0.0;
  for (int n = traj.first_step; n < traj.last_step(); ++n) {
    const NodalField& a = traj.state(n);
    const NodalField& b = traj.state(n + 1);
    for (std::size_t i = 0; i < a.size(); ++i) s += mass[i] * neg_part(b[i]) * (b[i] - a[i]);
  }
  return s / kappa;
}

Sc1PrimeReport check_sc1_prime(const Trajectory& traj) {
  for (int n = traj.first_step; n < traj.last_step(); ++n) {
    const NodalField& a = traj.state(n);
    const NodalField& b = traj.state(n + 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (neg_part(b[i]) < neg_part(a[i]) - 1e-12) return {false, n, i};
    }
  }
  return {};
}

MonitorRecord compute_monitors(const StructuredMesh& mesh, const Trajectory& traj) {
  require_full(traj);
  const double alpha = traj.meta.alpha;
  const double p = traj.meta.p;
  const double kappa = traj.meta.kappa;
  const double ell = traj.time_grid.ell();
  const double alpha_conj = conjugate_exponent(alpha);
  const auto mass = mesh.lumped_mass();

  MonitorRecord rec;
  double neg_sum = 0.0;
  for (int n = 0; n <= traj.time_grid.N; ++n) {
    const NodalField& u = traj.state(n);
    rec.est1 = std::max(rec.est1, lq_norm(mesh, u, alpha));
    const double w1p = w1p_norm(mesh, u, p);
    rec.est2 += ell * std::pow(w1p, p);
    rec.est4 = std::max(rec.est4, w1p);

    double half_power = 0.0;
    double dual_power = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double w = signed_power(u[i], 0.5 * alpha);  // |u|^{(alpha-2)/2} u
      half_power += mass[i] * w * w;
      dual_power += mass[i] * std::pow(std::abs(signed_power(u[i], alpha - 1.0)), alpha_conj);
    }
    rec.est3_1 = std::max(rec.est3_1, std::sqrt(half_power));
    rec.est5_1 = std::max(rec.est5_1, std::pow(dual_power, 1.0 / alpha_conj));

    if (n > 0) {
      const double neg2 = neg_l2_squared(mesh, u);
      neg_sum += neg2;
      rec.sc2_prime_value = std::max(rec.sc2_prime_value, std::sqrt(neg2) / kappa);
      const NodalField dq = difference_quotient(traj, [alpha](double x) { return signed_power(x, 0.5 * alpha); }, n - 1);
      double dq2 = 0.0;
      for (std::size_t i = 0; i < dq.size(); ++i) dq2 += mass[i] * dq[i] * dq[i];
      rec.est3 += ell * dq2;
    } else {
      rec.sc2_prime_value = std::max(rec.sc2_prime_value, std::sqrt(neg_l2_squared(mesh, u)) / kappa);
    }
  }
  rec.pen_sum = ell / kappa * neg_sum;
  rec.neg_norm = std::sqrt(ell * neg_sum);
  rec.sc1_value = check_sc1(mesh, traj, kappa);
  rec.sc1_prime_ok = check_sc1_prime(traj).ok;
  return rec;
}

std::vector<double> vi_defects(const StructuredMesh& mesh, const PhysicalParams& params, const Trajectory& traj,
                               const std::vector<TestField>& family) {
  require_full(traj);
  const auto mass = mesh.lumped_mass();
  const double alpha = params.alpha;
  const double p = params.p;
  const TimeGrid& grid = traj.time_grid;
  const double ell = grid.ell();

  std::vector<double> defect(family.size(), 0.0);
  std::vector<Vec2> flux(mesh.num_triangles());
  NodalField dphi(mesh.num_nodes());
  for (int n = 0; n < grid.N; ++n) {
    const NodalField& u_old = traj.state(n);
    const NodalField& u_new = traj.state(n + 1);
    const NodalField a = average_forcing(params.forcing, n, grid, mesh);
    for (std::size_t i = 0; i < dphi.size(); ++i) dphi[i] = phi_power(u_new[i], alpha) - phi_power(u_old[i], alpha);
    for (std::size_t t = 0; t < flux.size(); ++t) {
      const Vec2 g = triangle_gradient(mesh, t, u_new);
      const double norm = std::sqrt(dot(g, g));
      const double w = norm == 0.0 ? 0.0 : mesh.area(t) * params.mu[t] * std::pow(norm, p - 2.0);
      flux[t] = {w * g.x, w * g.y};
    }
    const double t_mid = 0.5 * (grid.time(n) + grid.time(n + 1));
    for (std::size_t k = 0; k < family.size(); ++k) {
      const NodalField v = family[k].at(t_mid);
      if (v.size() != mesh.num_nodes()) throw std::invalid_argument("test field size mismatch: " + family[k].name);
      NodalField diff(v.size());
      double lhs = 0.0;
      double rhs = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 0.0 || !std::isfinite(v[i]))
          throw std::invalid_argument("test field '" + family[k].name + "' is not nonnegative");
        if (mesh.is_boundary(i) && v[i] != 0.0)
          throw std::invalid_argument("test field '" + family[k].name + "' does not vanish on the boundary");
        diff[i] = v[i] - u_new[i];
        lhs += mass[i] * dphi[i] * v[i];
        rhs += ell * mass[i] * a[i] * diff[i];
      }
      for (std::size_t t = 0; t < flux.size(); ++t) lhs += ell * dot(flux[t], triangle_gradient(mesh, t, diff));
      defect[k] += lhs - rhs;
    }
  }

  auto power_sum = [&](const NodalField& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += mass[i] * std::pow(std::abs(u[i]), alpha);
    return s;
  };
  const double terminal = (power_sum(traj.state(grid.N)) - power_sum(traj.state(0))) / conjugate_exponent(alpha);
  for (double& d : defect) d -= terminal;
  return defect;
}

double vi_residual(const StructuredMesh& mesh, const PhysicalParams& params, const Trajectory& traj,
                   const std::vector<TestField>& family) {
  if (family.empty()) throw std::invalid_argument("empty test family");
  const auto d = vi_defects(mesh, params, traj, family);
  return *std::min_element(d.begin(), d.end());
}

std::vector<TestField> standard_test_family(const StructuredMesh& mesh, const Trajectory& traj) {
  const StructuredMesh* m = &mesh;
  const Trajectory* tr = &traj;
  const double T = traj.time_grid.T;

  const NodalField wide = sample(mesh, [m](Vec2 x) {
    const double lx = m->lx(), ly = m->ly();
    return 16.0 * x.x * (lx - x.x) * x.y * (ly - x.y) / (lx * lx * ly * ly);
  });
  const NodalField local = sample(mesh, [m](Vec2 x) {
    const double r = 0.2 * std::min(m->lx(), m->ly());
    const double dx = x.x - 0.3 * m->lx();
    const double dy = x.y - 0.6 * m->ly();
    const double s = std::max(0.0, 1.0 - (dx * dx + dy * dy) / (r * r));
    return s * s;
  });

  auto positive_part = [tr](double t, double scale) {
    NodalField v = interpolant_value(*tr, t);
    for (double& x : v) x = scale * std::max(x, 0.0);
    return v;
  };
  auto plus = [](NodalField v, const NodalField& b, double c) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += c * b[i];
    return v;
  };

  std::vector<TestField> fam;
  fam.push_back({"u+", [=](double t) { return positive_part(t, 1.0); }});
  fam.push_back({"2u+", [=](double t) { return positive_part(t, 2.0); }});
  fam.push_back({"u+/2", [=](double t) { return positive_part(t, 0.5); }});
  fam.push_back({"u+ + bump", [=](double t) { return plus(positive_part(t, 1.0), wide, 1.0); }});
  fam.push_back({"u+ + 0.1 bump", [=](double t) { return plus(positive_part(t, 1.0), wide, 0.1); }});
  fam.push_back({"u+ + local bump", [=](double t) { return plus(positive_part(t, 1.0), local, 1.0); }});
  fam.push_back({"u+ + oscillating bump", [=](double t) {
                   return plus(positive_part(t, 1.0), wide, 1.0 + std::sin(2.0 * std::numbers::pi * t / T));
                 }});
  fam.push_back({"zero", [n = mesh.num_nodes()](double) { return NodalField(n, 0.0); }});
  fam.push_back({"bump", [=](double) { return wide; }});
  fam.push_back({"local bump * t/T", [=](double t) { return plus(NodalField(local.size(), 0.0), local, t / T); }});
  return fam;
}

SweepTable kappa_sweep(const StructuredMesh& mesh, const PhysicalParams& params, const TimeGrid& grid,
                       const RunOptions& base, const std::vector<double>& kappas, bool keep_trajectories,
                       unsigned jobs) {
  if (kappas.empty()) throw std::invalid_argument("kappa list is empty");
  for (std::size_t k = 0; k < kappas.size(); ++k) {
    if (!(kappas[k] > 0.0)) throw std::invalid_argument("kappa values must be positive");
    if (k > 0 && !(kappas[k] < kappas[k - 1])) throw std::invalid_argument("kappa values must be strictly decreasing");
  }
  params.validate(mesh);

  SweepTable table;
  table.rows.resize(kappas.size());
  std::vector<Trajectory> trajs(kappas.size());

  auto do_row = [&](std::size_t k) {
    SweepRow& row = table.rows[k];
    row.kappa = kappas[k];
    RunOptions opts = base;
    opts.kappa = kappas[k];
    try {
      trajs[k] = run(mesh, params, grid, opts);
      row.monitors = compute_monitors(mesh, trajs[k]);
      row.neg_norm = row.monitors.neg_norm;
      row.neg_norm_over_kappa = row.neg_norm / row.kappa;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  jobs = std::max(1u, jobs);
  for (std::size_t start = 0; start < kappas.size(); start += jobs) {
    const std::size_t end = std::min(kappas.size(), start + jobs);
    std::vector<std::future<void>> pending;
    for (std::size_t k = start + 1; k < end; ++k) pending.push_back(std::async(std::launch::async, do_row, k));
    do_row(start);
    for (auto& f : pending) f.get();
  }

  const SweepRow* prev = nullptr;
  const Trajectory* prev_traj = nullptr;
  for (std::size_t k = 0; k < kappas.size(); ++k) {
    SweepRow& row = table.rows[k];
    if (!row.ok) {
      prev = nullptr;
      prev_traj = nullptr;
      continue;
    }
    if (prev != nullptr) {
      const NodalField& a = prev_traj->states.back();
      const NodalField& b = trajs[k].states.back();
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
      row.distance_to_previous = d;
      if (row.neg_norm > 1.05 * prev->neg_norm) table.neg_norm_nonincreasing = false;
    }
    prev = &row;
    prev_traj = &trajs[k];
  }
  if (keep_trajectories) table.trajectories = std::move(trajs);
  return table;
}

std::vector<double> neg_norm_decay_orders(const SweepTable& table) {
  std::vector<double> orders;
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const auto& a = table.rows[k - 1];
    const auto& b = table.rows[k];
    if (!a.ok || !b.ok) {
      orders.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    orders.push_back(std::log(a.neg_norm / b.neg_norm) / std::log(a.kappa / b.kappa));
  }
  return orders;
}

}  // namespace sia
