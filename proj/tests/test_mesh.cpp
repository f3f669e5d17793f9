#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mmfb/mesh.hpp"
#include "mmfb/mesh_io.hpp"

using namespace mmfb;

namespace {

// Independent altitude oracle: distance from each vertex to the line through
// the opposite edge.
double altitude_oracle(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  return std::abs(d.x() * (p.y() - a.y()) - d.y() * (p.x() - a.x())) / d.norm();
}

double min_height_oracle(const TriMesh& m) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < m.num_elements(); ++k) {
    const auto& t = m.triangle(k);
    const Vec2 x0 = m.vertex(t[0]), x1 = m.vertex(t[1]), x2 = m.vertex(t[2]);
    best = std::min({best, altitude_oracle(x0, x1, x2), altitude_oracle(x1, x2, x0),
                     altitude_oracle(x2, x0, x1)});
  }
  return best;
}

TriMesh unit_square_two_triangles() {
  return TriMesh::create({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
                         {VertexTag::Gamma1Fixed, VertexTag::Gamma1Fixed, VertexTag::Gamma1Fixed,
                          VertexTag::Gamma1Fixed});
}

}  // namespace

TEST_CASE("reference element has unit area and equal sides") {
  const auto v = ReferenceElement::vertices();
  const double area =
      0.5 * ((v[1] - v[0]).x() * (v[2] - v[0]).y() - (v[1] - v[0]).y() * (v[2] - v[0]).x());
  CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((v[1] - v[0]).norm() == doctest::Approx((v[2] - v[1]).norm()).epsilon(1e-14));
  CHECK((v[1] - v[0]).norm() == doctest::Approx((v[0] - v[2]).norm()).epsilon(1e-14));
  CHECK(ReferenceElement::edge_matrix().determinant() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("element geometry of the reference element is the identity case") {
  const auto v = ReferenceElement::vertices();
  const ElementGeometry g = compute_element_geometry(v[0], v[1], v[2]);
  CHECK(g.area == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((g.jacobian_to_reference - Mat2::Identity()).norm() < 1e-14);
}

TEST_CASE("element geometry of the unit right triangle") {
  const ElementGeometry g =
      compute_element_geometry(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
  CHECK(g.area == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(g.min_height == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
  // P1 basis gradients: phi0 = 1-x-y, phi1 = x, phi2 = y.
  CHECK((g.basis_gradients[0] - Vec2(-1, -1)).norm() < 1e-14);
  CHECK((g.basis_gradients[1] - Vec2(1, 0)).norm() < 1e-14);
  CHECK((g.basis_gradients[2] - Vec2(0, 1)).norm() < 1e-14);
}

TEST_CASE("collinear triangle raises DegenerateElement") {
  CHECK_THROWS_AS(compute_element_geometry(Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)),
                  DegenerateElement);
}

TEST_CASE("min_height of the single reference element matches the altitude oracle") {
  const auto v = ReferenceElement::vertices();
  TriMesh m = TriMesh::create({v[0], v[1], v[2]}, {{0, 1, 2}},
                              {VertexTag::Gamma1Fixed, VertexTag::Gamma1Fixed,
                               VertexTag::Gamma1Fixed});
  const double oracle = min_height_oracle(m);
  // Unit-area equilateral: altitude = 2*area/side with side 2/3^(1/4),
  // i.e. 3^(1/4).
  CHECK(oracle == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-13));
  CHECK(m.min_height() == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("min_height over the two-triangle unit square") {
  TriMesh m = unit_square_two_triangles();
  CHECK(min_height_oracle(m) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
  CHECK(m.min_height() == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("min_height raises on an inverted element") {
  TriMesh m = unit_square_two_triangles();
  // Push vertex 2 across the diagonal so one triangle inverts.
  m.set_position(2, Vec2(-1.0, -1.0));
  CHECK_THROWS_AS(m.min_height(), DegenerateElement);
  CHECK_FALSE(m.is_nonsingular(0.0));
}

TEST_CASE("is_nonsingular threshold semantics") {
  TriMesh annulus = generate_annulus(0.5, 1.0, 3, 12);
  CHECK(annulus.is_nonsingular(0.0));
  const double h = annulus.min_height();
  CHECK(annulus.is_nonsingular(0.5 * h));
  CHECK_FALSE(annulus.is_nonsingular(10.0 * h));

  // Collapsing a vertex onto a neighbor produces a zero-height element.
  TriMesh collapsed = unit_square_two_triangles();
  collapsed.set_position(1, collapsed.vertex(2));
  CHECK_FALSE(collapsed.is_nonsingular(1e-12));
}

TEST_CASE("vertex_patch on a structured annulus interior vertex") {
  TriMesh m = generate_annulus(0.5, 1.0, 4, 16);
  int checked = 0;
  for (int i = 0; i < m.num_vertices(); ++i) {
    if (m.tag(i) != VertexTag::Interior) continue;
    // Brute-force scan of the triangle list.
    int count = 0;
    for (int k = 0; k < m.num_elements(); ++k) {
      const auto& t = m.triangle(k);
      if (t[0] == i || t[1] == i || t[2] == i) ++count;
    }
    CHECK(count == 6);
    const auto patch = m.patch(i);
    CHECK(static_cast<int>(patch.size()) == count);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("vertex_patch of a square corner and an isolated vertex") {
  TriMesh m = TriMesh::create(
      {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {5, 5}}, {{0, 1, 2}, {0, 2, 3}},
      {VertexTag::Gamma1Fixed, VertexTag::Gamma1Fixed, VertexTag::Gamma1Fixed,
       VertexTag::Gamma1Fixed, VertexTag::Interior});
  // Find the reordered location of input corner vertex 1 and the isolated 4.
  int corner = -1, isolated = -1;
  for (int i = 0; i < m.num_vertices(); ++i) {
    if (m.to_original()[static_cast<std::size_t>(i)] == 1) corner = i;
    if (m.to_original()[static_cast<std::size_t>(i)] == 4) isolated = i;
  }
  CHECK(m.patch(corner).size() == 1);
  CHECK(m.patch(isolated).empty());
  CHECK_THROWS_AS(m.patch(99), IndexOutOfRange);
}

TEST_CASE("patch sizes sum to three times the element count") {
  TriMesh m = generate_annulus(0.3, 0.6, 5, 24);
  std::size_t total = 0;
  for (int i = 0; i < m.num_vertices(); ++i) total += m.patch(i).size();
  CHECK(total == static_cast<std::size_t>(3 * m.num_elements()));
}

TEST_CASE("jacobian invariants under rigid motion") {
  const Vec2 a(0.1, 0.2), b(1.3, 0.4), c(0.6, 1.5);
  const ElementGeometry g0 = compute_element_geometry(a, b, c);
  const double theta = 0.73;
  Mat2 R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Vec2 shift(3.0, -2.0);
  const ElementGeometry g1 =
      compute_element_geometry(R * a + shift, R * b + shift, R * c + shift);
  const Mat2 j0 = g0.jacobian_to_reference, j1 = g1.jacobian_to_reference;
  CHECK((j0 * j0.transpose()).trace() ==
        doctest::Approx((j1 * j1.transpose()).trace()).epsilon(1e-12));
  CHECK(j0.determinant() == doctest::Approx(j1.determinant()).epsilon(1e-12));
}

TEST_CASE("creation normalizes orientation and keeps it positive") {
  // Deliberately clockwise triangle.
  TriMesh m = TriMesh::create({{0, 0}, {0, 1}, {1, 0}}, {{0, 1, 2}},
                              {VertexTag::Gamma1Fixed, VertexTag::Gamma1Fixed,
                               VertexTag::Gamma1Fixed});
  CHECK(m.signed_area(0) > 0.0);
}

TEST_CASE("interior vertices come first after creation") {
  TriMesh m = generate_annulus(0.5, 1.0, 2, 8);
  for (int i = 0; i < m.num_interior(); ++i) CHECK(m.tag(i) == VertexTag::Interior);
  for (int i = m.num_interior(); i < m.num_vertices(); ++i) {
    CHECK(m.tag(i) != VertexTag::Interior);
  }
}
