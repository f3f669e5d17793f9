#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mmfb/errors.hpp"

namespace mmfb {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class VertexTag : std::uint8_t {
  Interior = 0,
  Gamma1Fixed = 1,
  Gamma2Free = 2,
};

// Rotate a vector by +90 degrees.
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// The reference element: an equilateral triangle with unit area, one vertex
// at the origin and one edge along the x axis.
struct ReferenceElement {
  // Side length of the unit-area equilateral triangle, 2/3^(1/4).
  static double side();
  static std::array<Vec2, 3> vertices();
  // Edge matrix [xi1-xi0, xi2-xi0]; det = 2 (twice the area).
  static Mat2 edge_matrix();
};

// Per-element geometry, recomputed from current vertex coordinates.
struct ElementGeometry {
  Mat2 edge_matrix;             // E_K = [x1-x0, x2-x0]
  double area = 0.0;            // det(E_K)/2 > 0
  double min_height = 0.0;      // shortest altitude = 2*area / longest edge
  Mat2 jacobian_to_reference;   // Ehat * E_K^{-1}
  std::array<Vec2, 3> basis_gradients;  // constant gradients of the P1 basis
};

struct BoundaryEdge {
  int a = -1;        // directed: domain lies to the left of a->b
  int b = -1;
  int element = -1;  // the unique incident element
  Vec2 outward_normal(std::span<const Vec2> pos) const {
    Vec2 t = pos[static_cast<std::size_t>(b)] - pos[static_cast<std::size_t>(a)];
    Vec2 n(t.y(), -t.x());
    return n.normalized();
  }
};

// Triangular mesh with fixed connectivity and movable vertex coordinates.
//
// Structural invariants, established by create() and preserved afterwards:
//   - interior vertices occupy indices [0, num_interior), boundary vertices
//     follow;
//   - every triangle is stored with positive signed area at creation time
//     (a negative area later always means the mesh tangled);
//   - vertices tagged Gamma1Fixed/Gamma2Free lie on the triangulation
//     boundary.
// Only coordinates may change after creation (set_positions).
class TriMesh {
 public:
  // Validates, normalizes orientation, reorders vertices interior-first
  // (stable within each class) and builds the connectivity caches.
  // Throws InvalidParameter / DegenerateElement / TagError.
  static TriMesh create(std::vector<Vec2> vertices,
                        std::vector<std::array<int, 3>> triangles,
                        std::vector<VertexTag> tags);

  int num_vertices() const { return static_cast<int>(verts_.size()); }
  int num_interior() const { return n_interior_; }
  int num_elements() const { return static_cast<int>(tris_.size()); }

  const Vec2& vertex(int i) const { return verts_[check_vertex(i)]; }
  VertexTag tag(int i) const { return tags_[check_vertex(i)]; }
  const std::array<int, 3>& triangle(int k) const { return tris_[check_element(k)]; }

  std::span<const Vec2> positions() const { return verts_; }
  void set_positions(std::span<const Vec2> pos);
  void set_position(int i, const Vec2& x) { verts_[check_vertex(i)] = x; }

  // Index each reordered vertex had in the input of create() (traceability
  // of the interior-first permutation).
  const std::vector<int>& to_original() const { return to_original_; }

  ElementGeometry element_geometry(int k) const;
  // Signed area from the stored vertex order; negative signals tangling.
  double signed_area(int k) const;
  double total_area() const;

  // Minimum element height over the mesh; throws DegenerateElement if any
  // element is inverted or collapsed.
  double min_height() const;

  // True iff all signed areas are positive and min_height >= floor.
  // Never throws: a degenerate element yields false.
  bool is_nonsingular(double floor = 0.0) const noexcept;

  // Elements incident to vertex i, each exactly once.
  std::span<const int> patch(int i) const;

  bool is_boundary_vertex(int i) const { return !vertex_bedges_[check_vertex(i)].empty(); }
  const std::vector<BoundaryEdge>& boundary_edges() const { return bedges_; }
  // Indices into boundary_edges() of the edges incident to vertex i.
  std::span<const int> vertex_boundary_edges(int i) const {
    return vertex_bedges_[check_vertex(i)];
  }

  // All vertices carrying the given tag, in index order.
  std::vector<int> vertices_with_tag(VertexTag t) const;

 private:
  TriMesh() = default;
  std::size_t check_vertex(int i) const {
    if (i < 0 || i >= num_vertices()) throw IndexOutOfRange("vertex index out of range");
    return static_cast<std::size_t>(i);
  }
  std::size_t check_element(int k) const {
    if (k < 0 || k >= num_elements()) throw IndexOutOfRange("element index out of range");
    return static_cast<std::size_t>(k);
  }
  void build_adjacency();

  std::vector<Vec2> verts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<VertexTag> tags_;
  int n_interior_ = 0;
  std::vector<int> to_original_;

  // CSR vertex->element adjacency.
  std::vector<int> patch_offsets_;
  std::vector<int> patch_elems_;
  std::vector<BoundaryEdge> bedges_;
  std::vector<std::vector<int>> vertex_bedges_;
};

// Geometry of a bare coordinate triple (shared by TriMesh and tests).
ElementGeometry compute_element_geometry(const Vec2& x0, const Vec2& x1, const Vec2& x2);

// Gradient of the P1 interpolant from its vertex values, in difference form
// (exactly zero for constant data).
inline Vec2 element_gradient(const ElementGeometry& geo, double u0, double u1, double u2) {
  return (u1 - u0) * geo.basis_gradients[1] + (u2 - u0) * geo.basis_gradients[2];
}

}  // namespace mmfb
