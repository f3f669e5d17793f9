#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mmfb/problems.hpp"

using namespace mmfb;

namespace {

CatalogOptions opts(MeshLevel level = MeshLevel::Coarse) {
  CatalogOptions o;
  o.level = level;
  o.data_dir = MMFB_TEST_DATA_DIR;
  return o;
}

}  // namespace

TEST_CASE("accuracy problem carries the analytic datum") {
  const ProblemSpec p = problem_catalog("ex1_annulus", opts());
  CHECK(p.kind == ProblemKind::Exterior);
  CHECK(p.datum(Vec2(0.6, 0.0)) == doctest::Approx(3.9152).epsilon(1e-4));
  CHECK(p.datum(Vec2(0.6, 0.0)) == doctest::Approx(-2.0 / std::log(0.6)).epsilon(1e-14));
  CHECK(p.dirichlet.gamma1(Vec2(0.3, 0.0)) == 1.0);
  CHECK(p.dirichlet.gamma2(Vec2(0.6, 0.0)) == 0.0);
  const TriMesh m = p.make_mesh();
  CHECK(m.is_nonsingular(1e-10));
}

TEST_CASE("interior L-shape problem") {
  const ProblemSpec p = problem_catalog("ex4_lshape_interior", opts());
  CHECK(p.kind == ProblemKind::Interior);
  const TriMesh m = p.make_mesh();
  CHECK(m.is_nonsingular(1e-10));
  // The free boundary starts on the circle of radius 1.5 centered (4.2, 6).
  for (int i : m.vertices_with_tag(VertexTag::Gamma2Free)) {
    CHECK((m.vertex(i) - Vec2(4.2, 6.0)).norm() == doctest::Approx(1.5).epsilon(1e-9));
  }
}

TEST_CASE("unknown problem name") {
  CHECK_THROWS_AS(problem_catalog("ex9_unknown", opts()), UnknownProblem);
}

TEST_CASE("every catalog problem loads a nonsingular mesh") {
  for (const auto& name : catalog_names()) {
    CAPTURE(name);
    const ProblemSpec p = problem_catalog(name, opts());
    const TriMesh m = p.make_mesh();
    CHECK(m.is_nonsingular(1e-10));
    CHECK_FALSE(m.vertices_with_tag(VertexTag::Gamma2Free).empty());
    CHECK_FALSE(m.vertices_with_tag(VertexTag::Gamma1Fixed).empty());
    // Positive Bernoulli datum on the free boundary.
    if (p.kind != ProblemKind::Obstacle) {
      for (int i : m.vertices_with_tag(VertexTag::Gamma2Free)) {
        CHECK(p.boundary_law().lambda_at(m.vertex(i)) > 0.0);
      }
    }
  }
}

TEST_CASE("wavy start places the free boundary on the prescribed curve") {
  const ProblemSpec p = problem_catalog("ex1_wavy", opts());
  const TriMesh m = p.make_mesh();
  for (int i : m.vertices_with_tag(VertexTag::Gamma2Free)) {
    const Vec2 x = m.vertex(i);
    const double th = std::atan2(x.y(), x.x());
    CHECK(x.norm() == doctest::Approx(0.5 + 0.1 * std::sin(5.0 * th)).epsilon(1e-9));
  }
}

TEST_CASE("variable-datum problem has the 10-fold modulation") {
  const ProblemSpec p = problem_catalog("ex5_variable_lambda", opts());
  const double base = -2.0 / std::log(0.6);
  CHECK(p.datum(Vec2(0.6, 0.0)) == doctest::Approx(base).epsilon(1e-12));
  // At theta = pi/20 the modulation sin(10 theta) = 1.
  const double th = std::numbers::pi / 20.0;
  CHECK(p.datum(0.6 * Vec2(std::cos(th), std::sin(th))) ==
        doctest::Approx(base * 0.5).epsilon(1e-12));
}

TEST_CASE("p-laplace problem honours the exponent override") {
  CatalogOptions o = opts();
  o.p_override = 5.0;
  const ProblemSpec p = problem_catalog("ex6_plaplace", o);
  CHECK(p.flux.kind == PdeFlux::Kind::PLaplace);
  CHECK(p.flux.p == 5.0);
  const ProblemSpec pd = problem_catalog("ex6_plaplace", opts());
  CHECK(pd.flux.p == 1.5);
}

TEST_CASE("obstacle problem data") {
  const ProblemSpec p = problem_catalog("ex7_obstacle", opts());
  CHECK(p.kind == ProblemKind::Obstacle);
  CHECK(p.flux.kind == PdeFlux::Kind::MinimalSurface);
  // psi at r = 0.8 is 0.6; zero outside the unit disk.
  CHECK(p.dirichlet.gamma2(Vec2(0.8, 0.0)) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(p.dirichlet.gamma1(Vec2(2.0, 0.0)) == 0.0);
  CHECK(p.datum(Vec2(0.8, 0.0)) == 0.0);
  REQUIRE(p.obstacle_gradient);
  CHECK((p.obstacle_gradient(Vec2(0.8, 0.0)) - Vec2(-0.8 / 0.6, 0.0)).norm() < 1e-12);
  CHECK(p.obstacle_gradient(Vec2(1.5, 0.0)).norm() == 0.0);
  const TriMesh m = p.make_mesh();
  // Free boundary on r = 0.8, fixed on r = 2.
  for (int i : m.vertices_with_tag(VertexTag::Gamma2Free)) {
    CHECK(m.vertex(i).norm() == doctest::Approx(0.8).epsilon(1e-12));
  }
  for (int i : m.vertices_with_tag(VertexTag::Gamma1Fixed)) {
    CHECK(m.vertex(i).norm() == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("lambda override replaces the datum") {
  CatalogOptions o = opts();
  o.lambda_override = 7.0;
  const ProblemSpec p = problem_catalog("ex2_tshape", o);
  CHECK(p.datum(Vec2(0.7, 0.1)) == 7.0);
  o.lambda_override = -1.0;
  CHECK_THROWS_AS(problem_catalog("ex2_tshape", o), InvalidParameter);
}
