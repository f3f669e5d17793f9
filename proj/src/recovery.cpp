#include "mmfb/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace mmfb {

namespace {

Vec2 averaged_gradient(const TriMesh& mesh, const Eigen::VectorXd& U, int i) {
  const auto patch = mesh.patch(i);
  if (patch.empty()) throw InvalidParameter("recover_gradient: vertex has an empty patch");
  Vec2 acc = Vec2::Zero();
  double total = 0.0;
  for (int k : patch) {
    const auto& t = mesh.triangle(k);
    const ElementGeometry geo = mesh.element_geometry(k);
    acc += geo.area * element_gradient(geo, U[t[0]], U[t[1]], U[t[2]]);
    total += geo.area;
  }
  return acc / total;
}

// Vertices within `rings` edge-hops of i through the element patches,
// including i itself, in deterministic (sorted) order.
std::vector<int> stencil_vertices(const TriMesh& mesh, int i, int rings) {
  std::set<int> found{i};
  std::set<int> frontier{i};
  for (int r = 0; r < rings; ++r) {
    std::set<int> next;
    for (int v : frontier) {
      for (int k : mesh.patch(v)) {
        for (int w : mesh.triangle(k)) {
          if (found.insert(w).second) next.insert(w);
        }
      }
    }
    frontier.swap(next);
    if (frontier.empty()) break;
  }
  return {found.begin(), found.end()};
}

bool lsq_gradient(const TriMesh& mesh, const Eigen::VectorXd& U, int i,
                  const std::vector<int>& sten, Vec2& out) {
  if (sten.size() < 6) return false;
  const Vec2 xc = mesh.vertex(i);
  double scale = 0.0;
  for (int v : sten) scale = std::max(scale, (mesh.vertex(v) - xc).norm());
  if (scale == 0.0) return false;

  Eigen::MatrixXd A(static_cast<Eigen::Index>(sten.size()), 6);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(sten.size()));
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    const Vec2 d = (mesh.vertex(sten[static_cast<std::size_t>(r)]) - xc) / scale;
    A(r, 0) = 1.0;
    A(r, 1) = d.x();
    A(r, 2) = d.y();
    A(r, 3) = d.x() * d.x();
    A(r, 4) = d.x() * d.y();
    A(r, 5) = d.y() * d.y();
    rhs[r] = U[sten[static_cast<std::size_t>(r)]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-9);
  if (qr.rank() < 6) return false;
  const Eigen::VectorXd c = qr.solve(rhs);
  out = Vec2(c[1], c[2]) / scale;
  return true;
}

}  // namespace

Vec2 recover_gradient(const TriMesh& mesh, const Eigen::VectorXd& U, int i,
                      const RecoveryStrategy& strategy) {
  if (U.size() != mesh.num_vertices()) throw InvalidParameter("recover_gradient: U size");
  if (strategy.kind == RecoveryStrategy::Kind::AreaWeightedAverage) {
    return averaged_gradient(mesh, U, i);
  }
  constexpr int kMaxRings = 3;
  Vec2 g;
  for (int rings = std::max(1, strategy.stencil_rings); rings <= kMaxRings; ++rings) {
    if (lsq_gradient(mesh, U, i, stencil_vertices(mesh, i, rings), g)) return g;
  }
  throw RankDeficientStencil("least-squares stencil rank-deficient after ring expansion");
}

Vec2 recover_normal(const TriMesh& mesh, int i) {
  const auto edges = mesh.vertex_boundary_edges(i);
  if (edges.size() != 2) {
    throw NonManifoldBoundary("vertex has " + std::to_string(edges.size()) +
                              " incident boundary edges (expected 2)");
  }
  const auto pos = mesh.positions();
  const Vec2 n = mesh.boundary_edges()[static_cast<std::size_t>(edges[0])].outward_normal(pos) +
                 mesh.boundary_edges()[static_cast<std::size_t>(edges[1])].outward_normal(pos);
  const double len = n.norm();
  if (!(len > 0.0)) throw NonManifoldBoundary("degenerate boundary corner (opposite normals)");
  return n / len;
}

Vec2 recover_tangent(const TriMesh& mesh, int i) {
  const auto edges = mesh.vertex_boundary_edges(i);
  if (edges.size() != 2) {
    throw NonManifoldBoundary("vertex has " + std::to_string(edges.size()) +
                              " incident boundary edges (expected 2)");
  }
  const auto pos = mesh.positions();
  Vec2 t = Vec2::Zero();
  for (int e : edges) {
    const auto& be = mesh.boundary_edges()[static_cast<std::size_t>(e)];
    const Vec2 d = pos[static_cast<std::size_t>(be.b)] - pos[static_cast<std::size_t>(be.a)];
    t += d.normalized();
  }
  const double len = t.norm();
  if (!(len > 0.0)) throw NonManifoldBoundary("degenerate boundary corner (opposite tangents)");
  return t / len;
}

double boundary_velocity(const TriMesh& mesh, const Eigen::VectorXd& U, int i,
                         const BoundaryLaw& law, const RecoveryStrategy& strategy) {
  const Vec2 n = recover_normal(mesh, i);
  const Vec2 g = recover_gradient(mesh, U, i, strategy);
  return -g.dot(n) - law.effective_datum(mesh.vertex(i), n);
}

}  // namespace mmfb
