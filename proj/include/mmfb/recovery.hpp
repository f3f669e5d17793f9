#pragma once

#include <functional>

#include <Eigen/Dense>

#include "mmfb/mesh.hpp"

namespace mmfb {

// Strategy for reconstructing vertex gradients from the piecewise-linear
// finite element solution.
struct RecoveryStrategy {
  enum class Kind { AreaWeightedAverage, QuadraticLeastSquares };

  Kind kind = Kind::QuadraticLeastSquares;
  // First stencil ring for the least-squares fit; expanded on demand.
  int stencil_rings = 1;

  static RecoveryStrategy averaging() { return {Kind::AreaWeightedAverage, 1}; }
  static RecoveryStrategy least_squares(int rings = 1) {
    if (rings < 1) throw InvalidParameter("stencil_rings must be >= 1");
    return {Kind::QuadraticLeastSquares, rings};
  }
};

// Gradient of u_h at vertex i. Averaging: area-weighted mean of the
// element-constant gradients on the vertex patch. Least squares: gradient at
// x_i of the quadratic fitted to the vertex values on the stencil (rings
// around i, expanded up to 3 rings until at least 6 points in general
// position are available; RankDeficientStencil afterwards).
Vec2 recover_gradient(const TriMesh& mesh, const Eigen::VectorXd& U, int i,
                      const RecoveryStrategy& strategy);

// Unit outward normal at a boundary vertex: normalized average of the unit
// outward normals of the two incident boundary edges. NonManifoldBoundary if
// the vertex does not have exactly two incident boundary edges.
Vec2 recover_normal(const TriMesh& mesh, int i);

// Unit tangent at a boundary vertex (normalized average of the two directed
// boundary edge directions); orthogonal to recover_normal by construction.
Vec2 recover_tangent(const TriMesh& mesh, int i);

// The data entering the free-boundary velocity law
//   v = -(grad u_h - grad psi) . n - lambda(x).
// Plain Bernoulli problems set lambda and leave obstacle_gradient null; the
// obstacle problem sets obstacle_gradient = grad psi and lambda = 0.
struct BoundaryLaw {
  std::function<double(const Vec2&)> lambda;
  std::function<Vec2(const Vec2&)> obstacle_gradient;

  double lambda_at(const Vec2& x) const { return lambda ? lambda(x) : 0.0; }
  // The part of the velocity that does not involve grad u_h, signed so that
  // v = -grad u_h . n - effective_datum.
  double effective_datum(const Vec2& x, const Vec2& n) const {
    double d = lambda_at(x);
    if (obstacle_gradient) d -= obstacle_gradient(x).dot(n);
    return d;
  }
};

// Signed normal speed of a free-boundary vertex; positive moves along +n.
double boundary_velocity(const TriMesh& mesh, const Eigen::VectorXd& U, int i,
                         const BoundaryLaw& law, const RecoveryStrategy& strategy);

}  // namespace mmfb
