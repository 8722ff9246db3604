#include "sia/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sia {

StructuredMesh StructuredMesh::build(std::size_t nx, std::size_t ny, double lx, double ly) {
  if (nx < 3 || ny < 3) {
    throw std::invalid_argument("mesh needs at least 3 nodes per axis, got " + std::to_string(nx) +
                                " x " + std::to_string(ny));
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw std::invalid_argument("domain lengths must be positive and finite");
  }

  StructuredMesh m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.lx_ = lx;
  m.ly_ = ly;

  const double hx = m.hx();
  const double hy = m.hy();
  m.nodes_.reserve(nx * ny);
  m.boundary_.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      // Snap the last row/column to the exact edge length.
      const double x = (i + 1 == nx) ? lx : static_cast<double>(i) * hx;
      const double y = (j + 1 == ny) ? ly : static_cast<double>(j) * hy;
      m.nodes_.push_back({x, y});
      const bool edge = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
      m.boundary_.push_back(edge ? 1 : 0);
      if (!edge) m.interior_.push_back(j * nx + i);
    }
  }

  const std::size_t ntri = 2 * (nx - 1) * (ny - 1);
  m.triangles_.reserve(ntri);
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const std::size_t ll = m.node_index(i, j);
      const std::size_t lr = m.node_index(i + 1, j);
      const std::size_t ul = m.node_index(i, j + 1);
      const std::size_t ur = m.node_index(i + 1, j + 1);
      // Diagonal ll -> ur; both triangles counter-clockwise.
      m.triangles_.push_back({ll, lr, ur});
      m.triangles_.push_back({ll, ur, ul});
    }
  }

  m.areas_.resize(ntri);
  m.basis_grads_.resize(ntri);
  m.lumped_mass_.assign(nx * ny, 0.0);
  for (std::size_t t = 0; t < ntri; ++t) {
    const auto& tri = m.triangles_[t];
    const Vec2 p0 = m.nodes_[tri[0]];
    const Vec2 p1 = m.nodes_[tri[1]];
    const Vec2 p2 = m.nodes_[tri[2]];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    m.areas_[t] = 0.5 * det;
    // grad phi_k = rot90(edge opposite k) / (2 area)
    m.basis_grads_[t][0] = {(p1.y - p2.y) / det, (p2.x - p1.x) / det};
    m.basis_grads_[t][1] = {(p2.y - p0.y) / det, (p0.x - p2.x) / det};
    m.basis_grads_[t][2] = {(p0.y - p1.y) / det, (p1.x - p0.x) / det};
    for (std::size_t k = 0; k < 3; ++k) m.lumped_mass_[tri[k]] += m.areas_[t] / 3.0;
  }
  return m;
}

Vec2 StructuredMesh::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  return {(nodes_[tri[0]].x + nodes_[tri[1]].x + nodes_[tri[2]].x) / 3.0,
          (nodes_[tri[0]].y + nodes_[tri[1]].y + nodes_[tri[2]].y) / 3.0};
}

Vec2 triangle_gradient(const StructuredMesh& mesh, std::size_t tri, std::span<const double> f) {
  if (tri >= mesh.num_triangles()) throw std::out_of_range("triangle index out of range");
  if (f.size() != mesh.num_nodes()) throw std::invalid_argument("field size does not match mesh");
  const auto& t = mesh.triangle(tri);
  Vec2 g;
  for (std::size_t k = 0; k < 3; ++k) {
    const Vec2 b = mesh.basis_gradient(tri, k);
    g.x += f[t[k]] * b.x;
    g.y += f[t[k]] * b.y;
  }
  return g;
}

}  // namespace sia
