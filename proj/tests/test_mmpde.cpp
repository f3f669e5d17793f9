#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "mmfb/mesh_io.hpp"
#include "mmfb/mmpde.hpp"
#include "mmfb/recovery.hpp"

using namespace mmfb;

namespace {

// Structured unit-square grid; boundary tagged as requested.
TriMesh unit_square_grid(int n, VertexTag boundary_tag = VertexTag::Gamma1Fixed) {
  std::vector<Vec2> verts;
  std::vector<VertexTag> tags;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      const bool bdry = i == 0 || i == n || j == 0 || j == n;
      tags.push_back(bdry ? boundary_tag : VertexTag::Interior);
    }
  }
  std::vector<std::array<int, 3>> tris;
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      tris.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      tris.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return TriMesh::create(verts, tris, tags);
}

// Random interior perturbation that keeps the mesh nonsingular.
TriMesh perturbed_mesh(std::mt19937& rng, double amplitude = 0.3) {
  std::uniform_int_distribution<int> size(3, 6);
  const int n = size(rng);
  std::uniform_real_distribution<double> d(-amplitude / n, amplitude / n);
  for (int attempt = 0; attempt < 50; ++attempt) {
    TriMesh m = unit_square_grid(n);
    for (int i = 0; i < m.num_interior(); ++i) {
      m.set_position(i, m.vertex(i) + Vec2(d(rng), d(rng)));
    }
    if (m.is_nonsingular(1e-6)) return m;
  }
  throw std::runtime_error("could not build a nonsingular random mesh");
}

// Central finite differences of the mesh energy.
std::vector<Vec2> fd_energy_gradient(const TriMesh& mesh) {
  TriMesh work = mesh;
  double area = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) area += mesh.signed_area(k);
  const double delta = 1e-6 * std::sqrt(area / mesh.num_elements());
  std::vector<Vec2> grad(static_cast<std::size_t>(mesh.num_vertices()));
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    for (int c = 0; c < 2; ++c) {
      Vec2 x = mesh.vertex(i);
      x[c] += delta;
      work.set_position(i, x);
      const double ep = mesh_energy_value(work);
      x[c] -= 2.0 * delta;
      work.set_position(i, x);
      const double em = mesh_energy_value(work);
      work.set_position(i, mesh.vertex(i));
      grad[static_cast<std::size_t>(i)][c] = (ep - em) / (2.0 * delta);
    }
  }
  return grad;
}

// max_i |a_i - b_i| / max_i |b_i|
double relative_mismatch(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, (a[i] - b[i]).lpNorm<Eigen::Infinity>());
    scale = std::max(scale, b[i].lpNorm<Eigen::Infinity>());
  }
  return diff / std::max(scale, 1e-300);
}

double area_coefficient_of_variation(const TriMesh& m) {
  double mean = 0.0;
  for (int k = 0; k < m.num_elements(); ++k) mean += m.signed_area(k);
  mean /= m.num_elements();
  double var = 0.0;
  for (int k = 0; k < m.num_elements(); ++k) {
    const double d = m.signed_area(k) - mean;
    var += d * d;
  }
  var /= m.num_elements();
  return std::sqrt(var) / mean;
}

}  // namespace

TEST_CASE("energy of the single reference element") {
  const auto v = ReferenceElement::vertices();
  TriMesh m = TriMesh::create({v[0], v[1], v[2]}, {{0, 1, 2}},
                              {VertexTag::Gamma1Fixed, VertexTag::Gamma1Fixed,
                               VertexTag::Gamma1Fixed});
  // trace = 2 and det = 1: I_h = (1/3) 2^{3/2} + (2^{3/2}/3) = 2^{5/2}/3.
  const double expected = std::pow(2.0, 2.5) / 3.0;
  const MeshEnergyReport rep = mesh_energy(m);
  CHECK(rep.energy == doctest::Approx(expected).epsilon(1e-13));
  CHECK(rep.element_contributions.size() == 1);
  CHECK(rep.element_contributions[0] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("element contributions sum to the energy and are positive") {
  std::mt19937 rng(4);
  TriMesh m = perturbed_mesh(rng);
  const MeshEnergyReport rep = mesh_energy(m);
  double sum = 0.0;
  for (double c : rep.element_contributions) {
    CHECK(c > 0.0);
    sum += c;
  }
  CHECK(sum == doctest::Approx(rep.energy).epsilon(1e-13));
}

TEST_CASE("energy is invariant under rigid motions of the whole mesh") {
  std::mt19937 rng(7);
  TriMesh m = perturbed_mesh(rng);
  const double e0 = mesh_energy_value(m);
  const double th = 0.61;
  Mat2 R;
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  TriMesh moved = m;
  for (int i = 0; i < m.num_vertices(); ++i) {
    moved.set_position(i, R * m.vertex(i) + Vec2(2.0, -5.0));
  }
  CHECK(mesh_energy_value(moved) == doctest::Approx(e0).epsilon(1e-12));
}

TEST_CASE("squashing an element drives the energy to infinity monotonically") {
  TriMesh m = TriMesh::create({{0, 0}, {1, 0}, {0.5, 1.0}}, {{0, 1, 2}},
                              {VertexTag::Gamma1Fixed, VertexTag::Gamma1Fixed,
                               VertexTag::Gamma1Fixed});
  double prev = mesh_energy_value(m);
  for (double y : {0.5, 0.25, 0.1, 0.02, 1e-3, 1e-5}) {
    m.set_position(2, Vec2(0.5, y));
    const double e = mesh_energy_value(m);
    CHECK(e > prev);
    prev = e;
  }
  CHECK(prev > 1e6);
}

TEST_CASE("keystone: analytic velocities match finite differences of the energy") {
  std::mt19937 rng(20240801);
  const double tau = 1e-5;
  for (int trial = 0; trial < 30; ++trial) {
    TriMesh m = perturbed_mesh(rng);
    const auto vel = energy_gradient_velocities(m, tau);
    const auto fd = fd_energy_gradient(m);
    // velocities = -(1/tau) dI_h/dx: compare -tau * v against the FD gradient.
    std::vector<Vec2> scaled(vel.size());
    for (std::size_t i = 0; i < vel.size(); ++i) scaled[i] = -tau * vel[i];
    CHECK(relative_mismatch(scaled, fd) < 1e-5);
  }
}

TEST_CASE("uniform equilateral patch is a critical point") {
  // Six equilateral triangles around the origin.
  std::vector<Vec2> verts{{0.0, 0.0}};
  std::vector<VertexTag> tags{VertexTag::Interior};
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < 6; ++j) {
    const double th = std::numbers::pi * j / 3.0;
    verts.emplace_back(std::cos(th), std::sin(th));
    tags.push_back(VertexTag::Gamma1Fixed);
    tris.push_back({0, 1 + j, 1 + (j + 1) % 6});
  }
  TriMesh m = TriMesh::create(verts, tris, tags);
  MmpdeConfig cfg;
  const auto vel = nodal_velocities(m, cfg);
  // The interior vertex sits at index 0 after reordering.
  CHECK(vel[0].norm() < 1e-9 / cfg.tau * 1e-6);
}

TEST_CASE("boundary policy zeroes gamma1 and the normal component on gamma2") {
  TriMesh m = generate_annulus(0.4, 1.0, 3, 18);
  // Perturb interior so velocities are nonzero.
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> d(-0.02, 0.02);
  for (int i = 0; i < m.num_interior(); ++i) m.set_position(i, m.vertex(i) + Vec2(d(rng), d(rng)));
  REQUIRE(m.is_nonsingular(0.0));
  MmpdeConfig cfg;
  const auto vel = nodal_velocities(m, cfg);
  for (int i = 0; i < m.num_vertices(); ++i) {
    if (m.tag(i) == VertexTag::Gamma1Fixed) {
      CHECK(vel[static_cast<std::size_t>(i)].norm() == 0.0);
    } else if (m.tag(i) == VertexTag::Gamma2Free) {
      const Vec2 n = recover_normal(m, i);
      const double vnorm = vel[static_cast<std::size_t>(i)].norm();
      CHECK(std::abs(vel[static_cast<std::size_t>(i)].dot(n)) <= 1e-14 * std::max(1.0, vnorm));
    }
  }
}

TEST_CASE("move_mesh keeps an already-uniform mesh in place") {
  TriMesh m = unit_square_grid(4);
  MmpdeConfig cfg;
  const TriMesh out = move_mesh(m, cfg, 1e-3);
  for (int i = 0; i < m.num_vertices(); ++i) {
    CHECK((out.vertex(i) - m.vertex(i)).norm() < 5e-4);
  }
  CHECK(out.is_nonsingular(0.0));
}

TEST_CASE("move_mesh relaxes a perturbed mesh with energy descent") {
  std::mt19937 rng(31);
  TriMesh m = unit_square_grid(5);
  std::uniform_real_distribution<double> d(-0.2 / 5.0, 0.2 / 5.0);
  for (int i = 0; i < m.num_interior(); ++i) m.set_position(i, m.vertex(i) + Vec2(d(rng), d(rng)));
  REQUIRE(m.is_nonsingular(0.0));

  MmpdeConfig cfg;
  std::vector<double> trace;
  const TriMesh out = move_mesh(m, cfg, 1e-3, &trace);
  CHECK(out.is_nonsingular(0.0));
  REQUIRE(trace.size() >= 2);
  // Descent along the trajectory, up to integrator tolerance slack.
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] <= trace[i - 1] + 10.0 * cfg.integrator.rtol * trace[i - 1]);
  }
  CHECK(trace.back() < trace.front());
  // The relaxed mesh is more uniform in element areas.
  CHECK(area_coefficient_of_variation(out) <= area_coefficient_of_variation(m) + 1e-12);
}

TEST_CASE("move_mesh survives aggressive perturbations on concave domains") {
  // L-shaped domain built from a structured grid minus one quadrant.
  std::vector<Vec2> verts;
  std::vector<VertexTag> tags;
  std::vector<std::array<int, 3>> tris;
  const int n = 6;
  auto inside = [n](int i, int j) { return !(i > n / 2 && j > n / 2); };
  std::vector<int> id((n + 1) * (n + 1), -1);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (!inside(i, j)) continue;
      id[static_cast<std::size_t>(j * (n + 1) + i)] = static_cast<int>(verts.size());
      verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      const bool bdry = i == 0 || i == n || j == 0 || j == n ||
                        (i == n / 2 && j >= n / 2) || (j == n / 2 && i >= n / 2);
      tags.push_back(bdry ? VertexTag::Gamma1Fixed : VertexTag::Interior);
    }
  }
  auto vid = [&](int i, int j) { return id[static_cast<std::size_t>(j * (n + 1) + i)]; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d2 = vid(i, j + 1);
      if (a < 0 || b < 0 || c < 0 || d2 < 0) continue;
      tris.push_back({a, b, c});
      tris.push_back({a, c, d2});
    }
  }
  TriMesh base = TriMesh::create(verts, tris, tags);

  std::mt19937 rng(55);
  std::uniform_real_distribution<double> d(-0.25 / n, 0.25 / n);
  MmpdeConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    TriMesh m = base;
    for (int i = 0; i < m.num_interior(); ++i) {
      m.set_position(i, m.vertex(i) + Vec2(d(rng), d(rng)));
    }
    if (!m.is_nonsingular(1e-9)) continue;
    const TriMesh out = move_mesh(m, cfg, 1e-3);
    CHECK(out.is_nonsingular(0.0));
  }
}

TEST_CASE("gamma2 vertices stay on the pre-movement polyline") {
  TriMesh m = generate_annulus(0.3, 0.6, 4, 24);
  // Perturb interior only; the free boundary polyline is the r = 0.6 polygon.
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> d(-0.01, 0.01);
  for (int i = 0; i < m.num_interior(); ++i) m.set_position(i, m.vertex(i) + Vec2(d(rng), d(rng)));
  REQUIRE(m.is_nonsingular(0.0));

  // Collect the original polyline segments.
  std::vector<std::pair<Vec2, Vec2>> segs;
  for (const auto& be : m.boundary_edges()) {
    if (m.tag(be.a) == VertexTag::Gamma2Free && m.tag(be.b) == VertexTag::Gamma2Free) {
      segs.emplace_back(m.vertex(be.a), m.vertex(be.b));
    }
  }
  MmpdeConfig cfg;
  const TriMesh out = move_mesh(m, cfg, 2e-3);
  for (int i : out.vertices_with_tag(VertexTag::Gamma2Free)) {
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : segs) {
      const Vec2 ab = b - a;
      const double s = std::clamp((out.vertex(i) - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
      dist = std::min(dist, (out.vertex(i) - (a + s * ab)).norm());
    }
    CHECK(dist < 1e-12);
  }
  // Gamma1 vertices are bit-identical.
  for (int i : out.vertices_with_tag(VertexTag::Gamma1Fixed)) {
    CHECK(out.vertex(i) == m.vertex(i));
  }
}

TEST_CASE("move_mesh rejects a singular input") {
  TriMesh m = unit_square_grid(3);
  m.set_position(0, Vec2(10.0, 10.0));  // tangle an interior vertex
  REQUIRE_FALSE(m.is_nonsingular(0.0));
  MmpdeConfig cfg;
  CHECK_THROWS_AS(move_mesh(m, cfg, 1e-3), InvalidParameter);
}
