#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "mmfb/flux.hpp"
#include "mmfb/mesh.hpp"
#include "mmfb/ode.hpp"

namespace mmfb {

using SpMat = Eigen::SparseMatrix<double>;

// Dirichlet boundary data, evaluated at current vertex positions. The
// optional gradients supply the exact rate of change of the data along a
// moving vertex path; when absent the data is treated as constant along
// vertex trajectories (true for all catalog problems except the obstacle
// problem, whose data is a function of position).
struct DirichletData {
  std::function<double(const Vec2&)> gamma1;
  std::function<double(const Vec2&)> gamma2;
  std::function<Vec2(const Vec2&)> grad_gamma1;  // may be null
  std::function<Vec2(const Vec2&)> grad_gamma2;  // may be null

  double value(VertexTag tag, const Vec2& x) const;
  Vec2 gradient(VertexTag tag, const Vec2& x) const;  // zero when null
};

// Sets the boundary entries of U (indices >= num_interior) to the Dirichlet
// data evaluated at the current vertex positions. Interior entries untouched.
void apply_dirichlet(const TriMesh& mesh, const DirichletData& g, Eigen::VectorXd& U);

// Mass operator B_ij = int phi_i phi_j dx, rows restricted to interior test
// functions (num_interior x num_vertices), assembled from the exact P1 local
// mass matrix (|K|/12) [[2,1,1],[1,2,1],[1,1,2]].
SpMat assemble_mass(const TriMesh& mesh);

// Right-hand side of the quasi-Lagrange semi-discrete form,
//   F_j = int (grad u_h . Xdot_h) phi_j dx - int a(grad u_h) grad phi_j . grad u_h dx,
// for interior j. U holds current values at all vertices (boundary entries
// included); xdot is the piecewise-linear nodal velocity field. Both terms
// are integrated exactly (element-constant gradients; P1 mass matrix for the
// convective term).
Eigen::VectorXd assemble_rhs(const TriMesh& mesh, const Eigen::VectorXd& U,
                             const std::vector<Vec2>& xdot, const PdeFlux& flux);

// dF/dU (rows: interior, cols: all vertices).
SpMat assemble_rhs_jacobian(const TriMesh& mesh, const Eigen::VectorXd& U,
                            const std::vector<Vec2>& xdot, const PdeFlux& flux);

// Linear interpolation between the vertex positions of two meshes sharing
// connectivity, over [t0, t1]. Nodal velocities are constant on the step.
class MeshPath {
 public:
  MeshPath(const TriMesh& m0, const TriMesh& m1, double t0, double t1);

  std::vector<Vec2> positions(double t) const;
  const std::vector<Vec2>& velocities() const { return xdot_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }

 private:
  std::vector<Vec2> x0_, x1_, xdot_;
  double t0_, t1_;
};

// The semi-discrete system B(X) dU/dt = F(U, X, Xdot) on a mesh-motion
// interval, reduced to the interior unknowns. Boundary values are eliminated:
// they enter the right-hand side through the Dirichlet data and the coupling
// block of the mass operator.
class MovingMeshHeatSystem : public ImplicitOdeSystem {
 public:
  MovingMeshHeatSystem(const TriMesh& mesh0, const TriMesh& mesh1, double t0, double t1,
                       PdeFlux flux, DirichletData data);

  int size() const override { return n_interior_; }
  bool has_mass() const override { return true; }
  void mass(double t, SpMat& M) override;
  void rhs(double t, const Eigen::VectorXd& yI, Eigen::VectorXd& f) override;
  void jacobian(double t, const Eigen::VectorXd& yI, SpMat& J) override;

  // Full vertex-value vector [interior; Dirichlet at X(t)].
  Eigen::VectorXd full_state(double t, const Eigen::VectorXd& yI);

  const MeshPath& path() const { return path_; }

 private:
  void move_to(double t);
  Eigen::VectorXd boundary_values(double t);
  Eigen::VectorXd boundary_rates(double t);

  TriMesh work_;
  MeshPath path_;
  PdeFlux flux_;
  DirichletData data_;
  int n_interior_;
  double current_t_;
};

// Convenience wrapper for one outer step: integrates the semi-discrete system
// over [t0, t1] starting from the full vertex-value vector U0 (boundary
// entries consistent with mesh0) and returns the full vector at t1 with
// boundary entries set to the Dirichlet data at the final positions.
Eigen::VectorXd integrate_heat_step(const TriMesh& mesh0, const TriMesh& mesh1, double t0,
                                    double t1, const PdeFlux& flux, const DirichletData& data,
                                    const Eigen::VectorXd& U0, const IntegratorConfig& cfg,
                                    IntegrateStats* stats = nullptr);

}  // namespace mmfb
