#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace sia {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// One scalar per mesh node, row-major (y outer, x inner).
using NodalField = std::vector<double>;

/// Structured triangulation of [0, Lx] x [0, Ly].
///
/// Every grid cell is cut along its lower-left to upper-right diagonal, so
/// the mesh has 2 (nx-1)(ny-1) right triangles. Nodes on the rectangle's
/// edges carry homogeneous Dirichlet conditions. The mesh is immutable once
/// built.
class StructuredMesh {
 public:
  using Triangle = std::array<std::size_t, 3>;

  /// Throws std::invalid_argument for nx, ny < 3 or nonpositive lengths.
  static StructuredMesh build(std::size_t nx, std::size_t ny, double lx, double ly);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return lx_ / static_cast<double>(nx_ - 1); }
  double hy() const { return ly_ / static_cast<double>(ny_ - 1); }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t node_index(std::size_t i, std::size_t j) const { return j * nx_ + i; }

  Vec2 node(std::size_t n) const { return nodes_[n]; }
  const Triangle& triangle(std::size_t t) const { return triangles_[t]; }
  double area(std::size_t t) const { return areas_[t]; }
  Vec2 centroid(std::size_t t) const;

  /// Gradient of the P1 basis function of local vertex k on triangle t.
  Vec2 basis_gradient(std::size_t t, std::size_t k) const { return basis_grads_[t][k]; }

  bool is_boundary(std::size_t n) const { return boundary_[n] != 0; }
  std::span<const char> boundary_mask() const { return boundary_; }
  std::span<const double> lumped_mass() const { return lumped_mass_; }
  std::span<const std::size_t> interior_nodes() const { return interior_; }

  NodalField zero_field() const { return NodalField(num_nodes(), 0.0); }

 private:
  StructuredMesh() = default;

  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  double lx_ = 0.0;
  double ly_ = 0.0;
  std::vector<Vec2> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<double> areas_;
  std::vector<std::array<Vec2, 3>> basis_grads_;
  std::vector<char> boundary_;
  std::vector<double> lumped_mass_;
  std::vector<std::size_t> interior_;
};

/// Constant gradient of the piecewise-linear interpolant of f on triangle tri.
Vec2 triangle_gradient(const StructuredMesh& mesh, std::size_t tri, std::span<const double> f);

/// Samples g at every node.
template <class F>
NodalField sample(const StructuredMesh& mesh, F&& g) {
  NodalField out(mesh.num_nodes());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = g(mesh.node(n));
  return out;
}

}  // namespace sia
