#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mmfb/mesh.hpp"
#include "mmfb/mesh_io.hpp"

using namespace mmfb;

TEST_CASE("load a 4-vertex 2-triangle unit square file") {
  std::istringstream in(
      "# unit square\n"
      "4 2\n"
      "1 0 0 1\n"
      "2 1 0 1\n"
      "3 1 1 1\n"
      "4 0 1 1\n"
      "1 1 2 3\n"
      "2 1 3 4\n");
  TriMesh m = read_mesh(in);
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_elements() == 2);
  CHECK(m.num_interior() == 0);
  CHECK(m.vertices_with_tag(VertexTag::Gamma2Free).empty());
}

TEST_CASE("vertex index gap is a ParseError") {
  std::istringstream in(
      "3 1\n"
      "1 0 0 1\n"
      "3 1 0 1\n"
      "4 0 1 1\n"
      "1 1 2 3\n");
  CHECK_THROWS_AS(read_mesh(in), ParseError);
}

TEST_CASE("malformed node line is a ParseError") {
  std::istringstream in(
      "3 1\n"
      "1 0 0\n"
      "2 1 0 1\n"
      "3 0 1 1\n"
      "1 1 2 3\n");
  CHECK_THROWS_AS(read_mesh(in), ParseError);
}

TEST_CASE("marking an interior vertex as free boundary is a TagError") {
  // Vertex 5 sits strictly inside the square fan; marker 2 must be rejected.
  std::istringstream in(
      "5 4\n"
      "1 0 0 1\n"
      "2 1 0 1\n"
      "3 1 1 1\n"
      "4 0 1 1\n"
      "5 0.5 0.5 2\n"
      "1 1 2 5\n"
      "2 2 3 5\n"
      "3 3 4 5\n"
      "4 4 1 5\n");
  CHECK_THROWS_AS(read_mesh(in), TagError);
}

TEST_CASE("save/load round-trip is the identity on an interior-first mesh") {
  TriMesh m = generate_annulus(0.3, 0.6, 3, 16);
  std::ostringstream out;
  write_mesh(m, out);
  std::istringstream in(out.str());
  TriMesh r = read_mesh(in);
  REQUIRE(r.num_vertices() == m.num_vertices());
  REQUIRE(r.num_elements() == m.num_elements());
  for (int i = 0; i < m.num_vertices(); ++i) {
    CHECK(r.vertex(i) == m.vertex(i));
    CHECK(r.tag(i) == m.tag(i));
  }
  for (int k = 0; k < m.num_elements(); ++k) CHECK(r.triangle(k) == m.triangle(k));
  // Byte-identical re-serialization.
  std::ostringstream out2;
  write_mesh(r, out2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("annulus generator: paper geometry case") {
  TriMesh m = generate_annulus(0.3, 0.6, 8, 48, VertexTag::Gamma1Fixed, VertexTag::Gamma2Free);
  CHECK(m.num_vertices() == 9 * 48);
  CHECK(m.num_elements() == 2 * 8 * 48);
  CHECK(m.is_nonsingular(0.0));
  for (int i = 0; i < m.num_vertices(); ++i) {
    const double r = m.vertex(i).norm();
    if (m.tag(i) == VertexTag::Gamma1Fixed) {
      CHECK(std::abs(r - 0.3) <= 1e-12 * 0.3);
    } else if (m.tag(i) == VertexTag::Gamma2Free) {
      CHECK(std::abs(r - 0.6) <= 1e-12 * 0.6);
    } else {
      CHECK(r > 0.3);
      CHECK(r < 0.6);
    }
  }
}

TEST_CASE("minimal annulus enumeration") {
  TriMesh m = generate_annulus(1.0, 2.0, 1, 3);
  CHECK(m.num_vertices() == 6);
  CHECK(m.num_elements() == 6);
  CHECK(m.is_nonsingular(0.0));
}

TEST_CASE("invalid annulus parameters") {
  CHECK_THROWS_AS(generate_annulus(2.0, 1.0, 4, 16), InvalidParameter);
  CHECK_THROWS_AS(generate_annulus(0.5, 1.0, 0, 16), InvalidParameter);
  CHECK_THROWS_AS(generate_annulus(0.5, 1.0, 4, 2), InvalidParameter);
}

TEST_CASE("wavy radial mesh stays nonsingular and hits the prescribed radii") {
  TriMesh m = generate_radial_mesh([](double) { return 0.3; },
                                   [](double th) { return 0.5 + 0.1 * std::sin(5.0 * th); }, 6,
                                   48, VertexTag::Gamma1Fixed, VertexTag::Gamma2Free);
  CHECK(m.is_nonsingular(1e-10));
  for (int i : m.vertices_with_tag(VertexTag::Gamma2Free)) {
    const Vec2 x = m.vertex(i);
    const double theta = std::atan2(x.y(), x.x());
    CHECK(x.norm() ==
          doctest::Approx(0.5 + 0.1 * std::sin(5.0 * theta)).epsilon(1e-12));
  }
}
