#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sia/monitors.hpp"
#include "sia/verification.hpp"

namespace sia {

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

enum class SnapshotFormat { csv, vtk };

SnapshotFormat parse_snapshot_format(std::string_view name);

/// "key=value" lines describing a run, used as comment headers.
std::vector<std::string> metadata_lines(const RunMetadata& meta);

/// CSV: '# ' metadata lines, header "x,y,value", one row per node in mesh
/// order. VTK: legacy ASCII STRUCTURED_POINTS with a single SCALARS array
/// named `name`; metadata is folded into the title line.
/// Throws std::runtime_error naming the path on IO failure.
void write_snapshot(std::span<const double> field, const StructuredMesh& mesh, const std::filesystem::path& path,
                    SnapshotFormat format, std::string_view name = "u",
                    const std::vector<std::string>& metadata = {});

/// Reads a CSV written by write_snapshot back into a nodal field. Node
/// coordinates must match the mesh.
NodalField read_field_csv(const std::filesystem::path& path, const StructuredMesh& mesh);

/// Per-triangle values, header "triangle,mu".
std::vector<double> read_triangle_csv(const std::filesystem::path& path, const StructuredMesh& mesh);

/// Rows "t,v_0,...,v_{n-1}" after a header starting with "t".
GriddedForcing read_gridded_forcing_csv(const std::filesystem::path& path, const StructuredMesh& mesh);

std::vector<std::string> monitor_columns();
std::vector<std::string> monitor_values(const MonitorRecord& rec);

void write_monitors_csv(const std::filesystem::path& path, const MonitorRecord& rec,
                        const std::vector<std::string>& metadata);
void write_sweep_csv(const std::filesystem::path& path, const SweepTable& table,
                     const std::vector<std::string>& metadata);
void write_mms_csv(const std::filesystem::path& path, const std::vector<MmsRow>& rows,
                   const std::vector<std::string>& metadata);

/// trajectory.json next to the stored states, enough to rebuild the mesh
/// and recompute monitors.
void write_trajectory_manifest(const std::filesystem::path& dir, const RunMetadata& meta, int stride,
                               const std::vector<std::string>& state_files);

struct StoredTrajectory {
  StructuredMesh mesh;
  Trajectory trajectory;
  int stride = 1;
};

/// Inverse of write_trajectory_manifest plus the CSV states. Throws
/// std::runtime_error when the directory does not hold a complete set of
/// states (stride > 1 or missing files).
StoredTrajectory read_trajectory(const std::filesystem::path& dir);

}  // namespace sia
