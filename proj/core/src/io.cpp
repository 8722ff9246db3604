#include "sia/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sia {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

double parse_double(std::string s, const std::filesystem::path& path, std::size_t line_no) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = s.find_first_not_of(' ');
  if (start == std::string::npos) start = s.size();
  double v = 0.0;
  const char* first = s.data() + start;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

/// Data rows of a CSV: comments ('#') and the header are skipped.
struct CsvRows {
  std::string header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

CsvRows read_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  CsvRows out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      out.header = line;
      have_header = true;
      continue;
    }
    out.rows.emplace_back(line_no, split(line));
  }
  if (!have_header) throw std::runtime_error(path.string() + ": missing header");
  return out;
}

void write_comment_block(std::ostream& out, const std::vector<std::string>& metadata) {
  for (const auto& m : metadata) out << "# " << m << '\n';
}

nlohmann::json meta_to_json(const RunMetadata& m) {
  return {{"p", m.p},
          {"alpha", m.alpha},
          {"kappa", m.kappa},
          {"delta", m.reg.delta},
          {"eps", m.reg.eps},
          {"tol_residual", m.solver.tol_residual},
          {"max_newton", m.solver.max_newton},
          {"nx", m.nx},
          {"ny", m.ny},
          {"Lx", m.lx},
          {"Ly", m.ly},
          {"T", m.T},
          {"N", m.N},
          {"forcing", m.forcing},
          {"quadrature", m.quadrature},
          {"version", m.version}};
}

RunMetadata meta_from_json(const nlohmann::json& j) {
  RunMetadata m;
  m.p = j.at("p").get<double>();
  m.alpha = j.at("alpha").get<double>();
  m.kappa = j.at("kappa").get<double>();
  m.reg.delta = j.at("delta").get<double>();
  m.reg.eps = j.at("eps").get<double>();
  m.solver.tol_residual = j.at("tol_residual").get<double>();
  m.solver.max_newton = j.at("max_newton").get<int>();
  m.nx = j.at("nx").get<std::size_t>();
  m.ny = j.at("ny").get<std::size_t>();
  m.lx = j.at("Lx").get<double>();
  m.ly = j.at("Ly").get<double>();
  m.T = j.at("T").get<double>();
  m.N = j.at("N").get<int>();
  m.forcing = j.at("forcing").get<std::string>();
  m.quadrature = j.at("quadrature").get<std::string>();
  m.version = j.at("version").get<std::string>();
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

SnapshotFormat parse_snapshot_format(std::string_view name) {
  if (name == "csv") return SnapshotFormat::csv;
  if (name == "vtk") return SnapshotFormat::vtk;
  throw std::invalid_argument("unknown snapshot format '" + std::string(name) + "'");
}

std::vector<std::string> metadata_lines(const RunMetadata& m) {
  return {"p=" + format_double(m.p),
          "alpha=" + format_double(m.alpha),
          "kappa=" + format_double(m.kappa),
          "delta=" + format_double(m.reg.delta),
          "eps=" + format_double(m.reg.eps),
          "tol_residual=" + format_double(m.solver.tol_residual),
          "mesh=" + std::to_string(m.nx) + "x" + std::to_string(m.ny),
          "domain=" + format_double(m.lx) + "x" + format_double(m.ly),
          "T=" + format_double(m.T),
          "N=" + std::to_string(m.N),
          "forcing=" + m.forcing,
          "quadrature=" + m.quadrature,
          "version=" + m.version};
}

void write_snapshot(std::span<const double> field, const StructuredMesh& mesh, const std::filesystem::path& path,
                    SnapshotFormat format, std::string_view name, const std::vector<std::string>& metadata) {
  if (field.size() != mesh.num_nodes()) throw std::invalid_argument("write_snapshot: field size does not match mesh");
  std::ofstream out = open_out(path);
  if (format == SnapshotFormat::csv) {
    write_comment_block(out, metadata);
    out << "x,y,value\n";
    for (std::size_t i = 0; i < field.size(); ++i) {
      const Vec2 x = mesh.node(i);
      out << format_double(x.x) << ',' << format_double(x.y) << ',' << format_double(field[i]) << '\n';
    }
  } else {
    std::string title;
    for (const auto& m : metadata) title += (title.empty() ? "" : " ") + m;
    if (title.empty()) title = std::string(name);
    // The title line is limited to 256 characters by the legacy format.
    if (title.size() > 255) title.resize(255);
    out << "# vtk DataFile Version 3.0\n"
        << title << '\n'
        << "ASCII\n"
        << "DATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << mesh.nx() << ' ' << mesh.ny() << " 1\n"
        << "ORIGIN 0 0 0\n"
        << "SPACING " << format_double(mesh.hx()) << ' ' << format_double(mesh.hy()) << " 1\n"
        << "POINT_DATA " << mesh.num_nodes() << '\n'
        << "SCALARS " << name << " double 1\n"
        << "LOOKUP_TABLE default\n";
    for (double v : field) out << format_double(v) << '\n';
  }
  finish(out, path);
}

NodalField read_field_csv(const std::filesystem::path& path, const StructuredMesh& mesh) {
  const CsvRows csv = read_csv(path);
  if (csv.header != "x,y,value") throw std::runtime_error(path.string() + ": expected header x,y,value");
  if (csv.rows.size() != mesh.num_nodes())
    throw std::runtime_error(path.string() + ": expected " + std::to_string(mesh.num_nodes()) + " rows, found " +
                             std::to_string(csv.rows.size()));
  NodalField out(mesh.num_nodes());
  const double tol = 1e-9 * std::max(mesh.lx(), mesh.ly());
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& [line_no, cells] = csv.rows[i];
    if (cells.size() != 3) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 3 columns");
    const Vec2 x = mesh.node(i);
    if (std::abs(parse_double(cells[0], path, line_no) - x.x) > tol ||
        std::abs(parse_double(cells[1], path, line_no) - x.y) > tol)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": node coordinates do not match the mesh");
    out[i] = parse_double(cells[2], path, line_no);
  }
  return out;
}

std::vector<double> read_triangle_csv(const std::filesystem::path& path, const StructuredMesh& mesh) {
  const CsvRows csv = read_csv(path);
  if (csv.header != "triangle,mu") throw std::runtime_error(path.string() + ": expected header triangle,mu");
  std::vector<double> out(mesh.num_triangles(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [line_no, cells] : csv.rows) {
    if (cells.size() != 2) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 2 columns");
    const double idx = parse_double(cells[0], path, line_no);
    if (idx < 0 || idx >= static_cast<double>(out.size()) || idx != std::floor(idx))
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad triangle index");
    out[static_cast<std::size_t>(idx)] = parse_double(cells[1], path, line_no);
  }
  for (std::size_t t = 0; t < out.size(); ++t)
    if (std::isnan(out[t])) throw std::runtime_error(path.string() + ": no value for triangle " + std::to_string(t));
  return out;
}

GriddedForcing read_gridded_forcing_csv(const std::filesystem::path& path, const StructuredMesh& mesh) {
  const CsvRows csv = read_csv(path);
  if (csv.header.rfind("t", 0) != 0) throw std::runtime_error(path.string() + ": header must start with t");
  GriddedForcing g;
  for (const auto& [line_no, cells] : csv.rows) {
    if (cells.size() != mesh.num_nodes() + 1)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(mesh.num_nodes() + 1) + " columns");
    g.times.push_back(parse_double(cells[0], path, line_no));
    NodalField row(mesh.num_nodes());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = parse_double(cells[i + 1], path, line_no);
    g.values.push_back(std::move(row));
  }
  if (g.times.empty()) throw std::runtime_error(path.string() + ": no data rows");
  return g;
}

std::vector<std::string> monitor_columns() {
  return {"est1", "est2", "est3", "est3_1", "est4", "est5_1", "pen_sum", "sc1_value", "sc1_prime_ok",
          "sc2_prime_value", "neg_norm"};
}

std::vector<std::string> monitor_values(const MonitorRecord& r) {
  return {format_double(r.est1),   format_double(r.est2),      format_double(r.est3),
          format_double(r.est3_1), format_double(r.est4),      format_double(r.est5_1),
          format_double(r.pen_sum), format_double(r.sc1_value), r.sc1_prime_ok ? "1" : "0",
          format_double(r.sc2_prime_value), format_double(r.neg_norm)};
}

namespace {
std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}
}  // namespace

void write_monitors_csv(const std::filesystem::path& path, const MonitorRecord& rec,
                        const std::vector<std::string>& metadata) {
  std::ofstream out = open_out(path);
  write_comment_block(out, metadata);
  out << join(monitor_columns()) << '\n' << join(monitor_values(rec)) << '\n';
  finish(out, path);
}

void write_sweep_csv(const std::filesystem::path& path, const SweepTable& table,
                     const std::vector<std::string>& metadata) {
  std::ofstream out = open_out(path);
  write_comment_block(out, metadata);
  out << "# neg_norm_nonincreasing=" << (table.neg_norm_nonincreasing ? 1 : 0) << '\n';
  out << "kappa,ok,neg_norm,neg_norm_over_kappa,distance_to_previous," << join(monitor_columns()) << ",error\n";
  for (const SweepRow& r : table.rows) {
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ' ';
    out << format_double(r.kappa) << ',' << (r.ok ? 1 : 0) << ',' << format_double(r.neg_norm) << ','
        << format_double(r.neg_norm_over_kappa) << ','
        << (std::isnan(r.distance_to_previous) ? std::string("nan") : format_double(r.distance_to_previous)) << ','
        << join(monitor_values(r.monitors)) << ',' << err << '\n';
  }
  finish(out, path);
}

void write_mms_csv(const std::filesystem::path& path, const std::vector<MmsRow>& rows,
                   const std::vector<std::string>& metadata) {
  std::ofstream out = open_out(path);
  write_comment_block(out, metadata);
  out << "n,N,h,ell,error\n";
  for (const MmsRow& r : rows)
    out << r.n << ',' << r.N << ',' << format_double(r.h) << ',' << format_double(r.ell) << ','
        << format_double(r.error) << '\n';
  finish(out, path);
}

void write_trajectory_manifest(const std::filesystem::path& dir, const RunMetadata& meta, int stride,
                               const std::vector<std::string>& state_files) {
  nlohmann::json j;
  j["metadata"] = meta_to_json(meta);
  j["stride"] = stride;
  j["states"] = state_files;
  const auto path = dir / "trajectory.json";
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

StoredTrajectory read_trajectory(const std::filesystem::path& dir) {
  const auto path = dir / "trajectory.json";
  std::ifstream in = open_in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  RunMetadata meta;
  int stride = 1;
  std::vector<std::string> files;
  try {
    meta = meta_from_json(j.at("metadata"));
    stride = j.at("stride").get<int>();
    files = j.at("states").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (stride != 1)
    throw std::runtime_error(dir.string() + ": states were written with stride " + std::to_string(stride) +
                             "; monitors need every step (stride 1)");
  if (files.size() != static_cast<std::size_t>(meta.N) + 1)
    throw std::runtime_error(dir.string() + ": expected " + std::to_string(meta.N + 1) + " states, manifest lists " +
                             std::to_string(files.size()));

  StoredTrajectory st{StructuredMesh::build(meta.nx, meta.ny, meta.lx, meta.ly), Trajectory{}, stride};
  st.trajectory.time_grid = TimeGrid{meta.T, meta.N};
  st.trajectory.first_step = 0;
  st.trajectory.meta = meta;
  for (const auto& f : files) st.trajectory.states.push_back(read_field_csv(dir / f, st.mesh));
  st.trajectory.step_diagnostics.resize(static_cast<std::size_t>(meta.N));
  return st;
}

}  // namespace sia
