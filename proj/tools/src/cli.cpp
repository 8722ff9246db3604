#include "sia/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "sia/config.hpp"
#include "sia/errors.hpp"
#include "sia/io.hpp"
#include "sia/monitors.hpp"
#include "sia/verification.hpp"
#include "sia/version.hpp"

namespace sia::cli {
namespace {

struct Failure {
  int code;
  std::string message;
};

RunConfig load(const std::string& path) {
  try {
    return load_config(path);
  } catch (const ConfigError& e) {
    throw Failure{kExitConfigError, std::string("config error: ") + e.what()};
  }
}

Setup setup_from(const RunConfig& cfg) {
  try {
    return build_setup(cfg);
  } catch (const std::exception& e) {
    throw Failure{kExitConfigError, std::string("config error: ") + e.what()};
  }
}

std::vector<std::string> file_metadata(const RunMetadata& meta, const RunConfig& cfg) {
  auto lines = metadata_lines(meta);
  lines.push_back("config=" + to_json(cfg).dump());
  return lines;
}

std::string state_name(int n, const std::string& field, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05d", n);
  return field + "_" + buf + "." + ext;
}

NodalField thickness_field(const NodalField& u, double p) {
  NodalField h(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) h[i] = u[i] > 0.0 ? thickness_from_u(u[i], p) : 0.0;
  return h;
}

/// Snapshots for every stride-th state plus the last one; returns the
/// CSV file names of the u field (used by the trajectory manifest).
std::vector<std::string> write_states(const Trajectory& traj, const StructuredMesh& mesh, const RunConfig& cfg,
                                      const std::filesystem::path& dir, const std::vector<std::string>& meta) {
  std::vector<std::string> files;
  const int stride = cfg.output.stride;
  for (int n = traj.first_step; n <= traj.last_step(); ++n) {
    if (n % stride != 0 && n != traj.time_grid.N) continue;
    const NodalField& u = traj.state(n);
    for (const auto& field : cfg.output.fields) {
      const NodalField values = field == "H" ? thickness_field(u, traj.meta.p) : u;
      for (const auto& fmt : cfg.output.formats) {
        const std::string name = state_name(n, field, fmt);
        write_snapshot(values, mesh, dir / "states" / name, parse_snapshot_format(fmt), field,
                       meta);
        if (field == "u" && fmt == "csv") files.push_back("states/" + name);
      }
    }
  }
  return files;
}

void print_monitors(std::ostream& out, const MonitorRecord& rec) {
  const auto cols = monitor_columns();
  const auto vals = monitor_values(rec);
  for (std::size_t i = 0; i < cols.size(); ++i) out << "  " << std::left << std::setw(16) << cols[i] << vals[i] << '\n';
}

int cmd_run(const std::string& config_path, const std::string& output_override, unsigned threads,
            std::ostream& out, std::ostream& err) {
  RunConfig cfg = load(config_path);
  if (!output_override.empty()) cfg.output.directory = output_override;
  if (threads > 0) cfg.threads = threads;
  Setup s = setup_from(cfg);
  s.options.threads = cfg.threads;
  const auto dir = cfg.output.directory;
  std::filesystem::create_directories(dir);
  {
    std::ofstream resolved(dir / "config.resolved.json");
    resolved << to_json(cfg).dump(2) << '\n';
  }

  Trajectory traj;
  try {
    traj = run(s.mesh, s.params, s.grid, s.options);
  } catch (const StepFailure& e) {
    const auto meta = file_metadata(e.partial().meta, cfg);
    write_states(e.partial(), s.mesh, cfg, dir, meta);
    err << "solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  }

  const auto meta = file_metadata(traj.meta, cfg);
  const auto files = write_states(traj, s.mesh, cfg, dir, meta);
  if (std::find(cfg.output.formats.begin(), cfg.output.formats.end(), "csv") != cfg.output.formats.end() &&
      std::find(cfg.output.fields.begin(), cfg.output.fields.end(), "u") != cfg.output.fields.end())
    write_trajectory_manifest(dir, traj.meta, cfg.output.stride, files);

  const MonitorRecord rec = compute_monitors(s.mesh, traj);
  write_monitors_csv(dir / "monitors.csv", rec, meta);

  int iterations = 0;
  for (const auto& d : traj.step_diagnostics) iterations += d.iterations;
  out << "run: " << traj.time_grid.N << " steps, " << iterations << " Newton iterations, kappa "
      << format_double(traj.meta.kappa) << '\n';
  print_monitors(out, rec);
  out << "  " << std::left << std::setw(16) << "vi_residual"
      << format_double(vi_residual(s.mesh, s.params, traj, standard_test_family(s.mesh, traj))) << '\n';
  out << "output: " << dir.string() << '\n';
  return kExitOk;
}

std::vector<double> parse_kappas(const std::string& text) {
  std::vector<double> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      ks.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure{kExitConfigError, "config error: bad kappa value '" + item + "'"};
    }
  }
  if (ks.empty()) throw Failure{kExitConfigError, "config error: --kappas is empty"};
  return ks;
}

int cmd_sweep(const std::string& config_path, const std::string& kappas_text, const std::string& output_override,
              unsigned jobs, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load(config_path);
  if (!output_override.empty()) cfg.output.directory = output_override;
  const Setup s = setup_from(cfg);
  const std::vector<double> kappas = parse_kappas(kappas_text);

  SweepTable table;
  try {
    table = kappa_sweep(s.mesh, s.params, s.grid, s.options, kappas, false, jobs);
  } catch (const std::invalid_argument& e) {
    throw Failure{kExitConfigError, std::string("config error: ") + e.what()};
  }

  const auto dir = cfg.output.directory;
  // Shared metadata; kappa differs per row and is a table column.
  RunMetadata meta = run_metadata(s.mesh, s.params, s.grid, s.options);
  meta.kappa = std::numeric_limits<double>::quiet_NaN();
  const auto lines = file_metadata(meta, cfg);
  write_sweep_csv(dir / "sweep.csv", table, lines);
  bool all_ok = true;
  for (const SweepRow& row : table.rows) {
    if (!row.ok) {
      all_ok = false;
      err << "kappa " << format_double(row.kappa) << " failed: " << row.error << '\n';
      continue;
    }
    auto row_meta = lines;
    row_meta.push_back("kappa=" + format_double(row.kappa));
    write_monitors_csv(dir / ("kappa_" + format_double(row.kappa)) / "monitors.csv", row.monitors, row_meta);
  }

  out << std::left << std::setw(12) << "kappa" << std::setw(14) << "neg_norm" << std::setw(14) << "neg/kappa"
      << std::setw(14) << "sc1" << "sc1'\n";
  for (const SweepRow& row : table.rows) {
    out << std::setw(12) << format_double(row.kappa);
    if (!row.ok) {
      out << "failed\n";
      continue;
    }
    out << std::setw(14) << std::setprecision(6) << row.neg_norm << std::setw(14) << row.neg_norm_over_kappa
        << std::setw(14) << row.monitors.sc1_value << (row.monitors.sc1_prime_ok ? "ok" : "violated") << '\n';
  }
  const auto orders = neg_norm_decay_orders(table);
  out << "decay orders:";
  for (double o : orders) out << ' ' << std::setprecision(4) << o;
  out << "\nneg_norm nonincreasing: " << (table.neg_norm_nonincreasing ? "yes" : "no") << '\n';
  out << "output: " << dir.string() << '\n';
  return all_ok ? kExitOk : kExitSolverFailure;
}

int cmd_mms(const std::string& config_path, const std::string& output_override, std::ostream& out,
            std::ostream& err) {
  RunConfig cfg = load(config_path);
  if (!output_override.empty()) cfg.output.directory = output_override;
  const Setup s = setup_from(cfg);
  MmsCase mms;
  mms.amplitude = cfg.mms.amplitude;
  mms.rate = cfg.mms.rate;
  mms.mu_slope = cfg.mms.mu_slope;
  mms.lx = cfg.domain.lx;
  mms.ly = cfg.domain.ly;
  mms.mu0 = s.params.mu1;

  std::vector<MmsRow> rows;
  try {
    rows = mms_convergence(mms, cfg.physics.p, cfg.mms.meshes, cfg.mms.steps, cfg.time.T, s.options);
  } catch (const StepFailure& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const std::domain_error& e) {
    throw Failure{kExitConfigError, std::string("config error: ") + e.what()};
  }

  RunMetadata meta;
  meta.p = cfg.physics.p;
  meta.alpha = alpha_of(cfg.physics.p);
  meta.kappa = s.options.kappa;
  meta.reg = s.options.reg;
  meta.solver = s.options.solver;
  meta.lx = cfg.domain.lx;
  meta.ly = cfg.domain.ly;
  meta.T = cfg.time.T;
  meta.forcing = "manufactured";
  meta.quadrature = "gauss2";
  meta.version = std::string(kVersion);
  write_mms_csv(cfg.output.directory / "mms.csv", rows, file_metadata(meta, cfg));

  out << std::left << std::setw(6) << "n" << std::setw(6) << "N" << "error\n";
  for (const MmsRow& r : rows) out << std::setw(6) << r.n << std::setw(6) << r.N << format_double(r.error) << '\n';
  // Orders along the finest mesh (time) and the finest N (space).
  const std::size_t nm = cfg.mms.meshes.size();
  const std::size_t ns = cfg.mms.steps.size();
  auto at = [&](std::size_t im, std::size_t is) { return rows[im * ns + is].error; };
  if (ns > 1) {
    out << "temporal orders:";
    for (std::size_t i = 0; i + 1 < ns; ++i) out << ' ' << std::setprecision(4) << observed_order(at(nm - 1, i), at(nm - 1, i + 1));
    out << '\n';
  }
  if (nm > 1) {
    out << "spatial orders:";
    for (std::size_t i = 0; i + 1 < nm; ++i) out << ' ' << std::setprecision(4) << observed_order(at(i, ns - 1), at(i + 1, ns - 1));
    out << '\n';
  }
  return kExitOk;
}

int cmd_verify(std::size_t samples, int problems, std::uint64_t seed, std::ostream& out) {
  const LemmaReport lemmas = lemma_inequality_suite(samples, seed);
  std::size_t lemma_pass = 0;
  for (const LemmaCheck& c : lemmas.checks) {
    out << "lemma " << std::left << std::setw(34) << c.name << (c.passed ? "pass" : "FAIL") << "  samples "
        << c.samples << "  violations " << c.violations << "  extreme " << std::setprecision(6) << c.extreme << '\n';
    lemma_pass += c.passed ? 1 : 0;
  }

  // Newton solve against the independent oracle on random 5x5 problems.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double ps[] = {2.0, 2.8, 3.0, 5.0};
  const double kappas[] = {1e-1, 1e-3};
  const auto mesh = StructuredMesh::build(5, 5, 1.0, 1.0);
  int oracle_pass = 0;
  double worst = 0.0;
  SolverConfig solver;
  for (int k = 0; k < problems; ++k) {
    const double p = ps[k % 4];
    PhysicalParams params = PhysicalParams::uniform(mesh, p, 0.5 + unit(rng), Forcing(ConstantForcing{0.0}),
                                                    mesh.zero_field());
    NodalField prev = mesh.zero_field();
    NodalField abar = mesh.zero_field();
    for (std::size_t i : mesh.interior_nodes()) {
      prev[i] = unit(rng) * unit(rng);
      abar[i] = 4.0 * unit(rng) - 2.0;
    }
    const StepProblem problem{mesh, params, prev, abar, 0.05 + 0.2 * unit(rng), kappas[(k / 4) % 2]};
    const NodalField ref = brute_force_step_oracle(problem);
    const StepResult res = solve_step(problem, solver);
    double diff = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) diff = std::max(diff, std::abs(ref[i] - res.u_next[i]));
    worst = std::max(worst, diff);
    oracle_pass += diff <= 10.0 * solver.tol_residual ? 1 : 0;
  }
  out << "oracle " << oracle_pass << "/" << problems << " problems within " << format_double(10.0 * solver.tol_residual)
      << " (worst " << std::setprecision(3) << worst << ")\n";
  out << "summary: lemmas " << lemma_pass << "/" << lemmas.checks.size() << ", oracle " << oracle_pass << "/"
      << problems << '\n';
  return lemmas.passed() && oracle_pass == problems ? kExitOk : kExitSolverFailure;
}

int cmd_monitors(const std::string& dir, const std::string& output, std::ostream& out) {
  const StoredTrajectory st = [&] {
    try {
      return read_trajectory(dir);
    } catch (const std::exception& e) {
      throw Failure{kExitConfigError, std::string("cannot load trajectory: ") + e.what()};
    }
  }();
  const MonitorRecord rec = compute_monitors(st.mesh, st.trajectory);
  const auto meta = metadata_lines(st.trajectory.meta);
  if (!output.empty()) write_monitors_csv(output, rec, meta);
  for (const auto& m : meta) out << "# " << m << '\n';
  const auto cols = monitor_columns();
  const auto vals = monitor_values(rec);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << vals[i];
  out << '\n';
  return kExitOk;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized shallow-ice obstacle solver"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config, output, kappas, traj_dir;
  unsigned threads = 0;
  unsigned jobs = 1;
  std::size_t samples = 100000;
  int problems = 16;
  std::uint64_t seed = 12345;

  auto* run_cmd = app.add_subcommand("run", "Single trajectory plus monitors");
  run_cmd->add_option("config", config, "JSON run configuration")->required();
  run_cmd->add_option("-o,--output", output, "Output directory (overrides the config)");
  run_cmd->add_option("-t,--threads", threads, "Assembly threads (overrides the config)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Penalty continuation table");
  sweep_cmd->add_option("config", config, "JSON run configuration")->required();
  sweep_cmd->add_option("--kappas", kappas, "Comma-separated, strictly decreasing penalty parameters")->required();
  sweep_cmd->add_option("-o,--output", output, "Output directory (overrides the config)");
  sweep_cmd->add_option("-j,--jobs", jobs, "Rows run concurrently")->check(CLI::PositiveNumber);

  auto* mms_cmd = app.add_subcommand("mms", "Manufactured-solution convergence study");
  mms_cmd->add_option("config", config, "JSON run configuration")->required();
  mms_cmd->add_option("-o,--output", output, "Output directory (overrides the config)");

  auto* verify_cmd = app.add_subcommand("verify", "Oracle and inequality self-checks");
  verify_cmd->add_option("--samples", samples, "Samples per inequality")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--problems", problems, "Random oracle problems")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", seed, "RNG seed");

  auto* monitors_cmd = app.add_subcommand("monitors", "Recompute monitors from saved states");
  monitors_cmd->add_option("dir", traj_dir, "Directory holding trajectory.json")->required();
  monitors_cmd->add_option("-o,--output", output, "Also write the record to this CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(config, output, threads, out, err);
    if (*sweep_cmd) return cmd_sweep(config, kappas, output, jobs, out, err);
    if (*mms_cmd) return cmd_mms(config, output, out, err);
    if (*verify_cmd) return cmd_verify(samples, problems, seed, out);
    if (*monitors_cmd) return cmd_monitors(traj_dir, output, out);
  } catch (const Failure& f) {
    err << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitConfigError;
}

}  // namespace sia::cli
