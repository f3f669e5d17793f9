#include "mmfb/fem.hpp"

#include <cmath>
#include <vector>

namespace mmfb {

namespace {

// Exact P1 local mass matrix scaled by |K|: (|K|/12) [[2,1,1],[1,2,1],[1,1,2]].
inline double local_mass(double area, int i, int j) {
  return (i == j ? 2.0 : 1.0) * area / 12.0;
}

inline double checked_diffusivity(const PdeFlux& flux, const Vec2& g) {
  const double a = flux.a(g);
  if (!std::isfinite(a) || !(a > 0.0)) {
    throw NonpositiveDiffusivity("flux coefficient a(grad u) = " + std::to_string(a));
  }
  return a;
}

}  // namespace

double DirichletData::value(VertexTag tag, const Vec2& x) const {
  switch (tag) {
    case VertexTag::Gamma1Fixed:
      return gamma1 ? gamma1(x) : 0.0;
    case VertexTag::Gamma2Free:
      return gamma2 ? gamma2(x) : 0.0;
    default:
      throw InvalidParameter("Dirichlet data requested for an interior vertex");
  }
}

Vec2 DirichletData::gradient(VertexTag tag, const Vec2& x) const {
  switch (tag) {
    case VertexTag::Gamma1Fixed:
      return grad_gamma1 ? grad_gamma1(x) : Vec2::Zero();
    case VertexTag::Gamma2Free:
      return grad_gamma2 ? grad_gamma2(x) : Vec2::Zero();
    default:
      throw InvalidParameter("Dirichlet data requested for an interior vertex");
  }
}

void apply_dirichlet(const TriMesh& mesh, const DirichletData& g, Eigen::VectorXd& U) {
  if (U.size() != mesh.num_vertices()) throw InvalidParameter("apply_dirichlet: size mismatch");
  for (int i = mesh.num_interior(); i < mesh.num_vertices(); ++i) {
    U[i] = g.value(mesh.tag(i), mesh.vertex(i));
  }
}

SpMat assemble_mass(const TriMesh& mesh) {
  const int ni = mesh.num_interior();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_elements()) * 9);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& t = mesh.triangle(k);
    const double area = mesh.element_geometry(k).area;
    for (int i = 0; i < 3; ++i) {
      if (t[static_cast<std::size_t>(i)] >= ni) continue;
      for (int j = 0; j < 3; ++j) {
        trips.emplace_back(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>(j)],
                           local_mass(area, i, j));
      }
    }
  }
  SpMat B(ni, mesh.num_vertices());
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

Eigen::VectorXd assemble_rhs(const TriMesh& mesh, const Eigen::VectorXd& U,
                             const std::vector<Vec2>& xdot, const PdeFlux& flux) {
  if (U.size() != mesh.num_vertices()) throw InvalidParameter("assemble_rhs: U size mismatch");
  if (xdot.size() != static_cast<std::size_t>(mesh.num_vertices())) {
    throw InvalidParameter("assemble_rhs: velocity size mismatch");
  }
  const int ni = mesh.num_interior();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(ni);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& t = mesh.triangle(k);
    const ElementGeometry geo = mesh.element_geometry(k);
    const Vec2 grad_u = element_gradient(geo, U[t[0]], U[t[1]], U[t[2]]);
    const double a = checked_diffusivity(flux, grad_u);
    for (int j = 0; j < 3; ++j) {
      const int row = t[static_cast<std::size_t>(j)];
      if (row >= ni) continue;
      double conv = 0.0;
      for (int m = 0; m < 3; ++m) {
        conv += local_mass(geo.area, j, m) *
                grad_u.dot(xdot[static_cast<std::size_t>(t[static_cast<std::size_t>(m)])]);
      }
      const double stiff =
          a * geo.area * geo.basis_gradients[static_cast<std::size_t>(j)].dot(grad_u);
      F[row] += conv - stiff;
    }
  }
  return F;
}

SpMat assemble_rhs_jacobian(const TriMesh& mesh, const Eigen::VectorXd& U,
                            const std::vector<Vec2>& xdot, const PdeFlux& flux) {
  if (U.size() != mesh.num_vertices()) throw InvalidParameter("jacobian: U size mismatch");
  const int ni = mesh.num_interior();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_elements()) * 9);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& t = mesh.triangle(k);
    const ElementGeometry geo = mesh.element_geometry(k);
    const Vec2 grad_u = element_gradient(geo, U[t[0]], U[t[1]], U[t[2]]);
    const double a = checked_diffusivity(flux, grad_u);
    const Vec2 da = flux.da_dg(grad_u);
    for (int j = 0; j < 3; ++j) {
      const int row = t[static_cast<std::size_t>(j)];
      if (row >= ni) continue;
      const Vec2& gj = geo.basis_gradients[static_cast<std::size_t>(j)];
      for (int m = 0; m < 3; ++m) {
        const Vec2& gm = geo.basis_gradients[static_cast<std::size_t>(m)];
        double conv = 0.0;
        for (int l = 0; l < 3; ++l) {
          conv += local_mass(geo.area, j, l) *
                  gm.dot(xdot[static_cast<std::size_t>(t[static_cast<std::size_t>(l)])]);
        }
        const double stiff = geo.area * (da.dot(gm) * gj.dot(grad_u) + a * gj.dot(gm));
        trips.emplace_back(row, t[static_cast<std::size_t>(m)], conv - stiff);
      }
    }
  }
  SpMat J(ni, mesh.num_vertices());
  J.setFromTriplets(trips.begin(), trips.end());
  return J;
}

MeshPath::MeshPath(const TriMesh& m0, const TriMesh& m1, double t0, double t1)
    : t0_(t0), t1_(t1) {
  if (m0.num_vertices() != m1.num_vertices() || m0.num_elements() != m1.num_elements()) {
    throw ConnectivityMismatch("mesh path endpoints differ in size");
  }
  for (int k = 0; k < m0.num_elements(); ++k) {
    if (m0.triangle(k) != m1.triangle(k)) {
      throw ConnectivityMismatch("mesh path endpoints differ in connectivity");
    }
  }
  if (!(t1 > t0)) throw InvalidParameter("MeshPath: need t0 < t1");
  x0_.assign(m0.positions().begin(), m0.positions().end());
  x1_.assign(m1.positions().begin(), m1.positions().end());
  xdot_.resize(x0_.size());
  const double inv_dt = 1.0 / (t1 - t0);
  for (std::size_t i = 0; i < x0_.size(); ++i) xdot_[i] = (x1_[i] - x0_[i]) * inv_dt;
}

std::vector<Vec2> MeshPath::positions(double t) const {
  const double w1 = (t - t0_) / (t1_ - t0_);
  const double w0 = 1.0 - w1;
  std::vector<Vec2> x(x0_.size());
  for (std::size_t i = 0; i < x0_.size(); ++i) x[i] = w0 * x0_[i] + w1 * x1_[i];
  return x;
}

MovingMeshHeatSystem::MovingMeshHeatSystem(const TriMesh& mesh0, const TriMesh& mesh1, double t0,
                                           double t1, PdeFlux flux, DirichletData data)
    : work_(mesh0),
      path_(mesh0, mesh1, t0, t1),
      flux_(flux),
      data_(std::move(data)),
      n_interior_(mesh0.num_interior()),
      current_t_(t0) {}

void MovingMeshHeatSystem::move_to(double t) {
  if (t == current_t_) return;
  const auto pos = path_.positions(t);
  work_.set_positions(pos);
  current_t_ = t;
}

Eigen::VectorXd MovingMeshHeatSystem::boundary_values(double t) {
  move_to(t);
  const int nb = work_.num_vertices() - n_interior_;
  Eigen::VectorXd g(nb);
  for (int i = 0; i < nb; ++i) {
    const int v = n_interior_ + i;
    g[i] = data_.value(work_.tag(v), work_.vertex(v));
  }
  return g;
}

Eigen::VectorXd MovingMeshHeatSystem::boundary_rates(double t) {
  move_to(t);
  const int nb = work_.num_vertices() - n_interior_;
  Eigen::VectorXd r(nb);
  const auto& xdot = path_.velocities();
  for (int i = 0; i < nb; ++i) {
    const int v = n_interior_ + i;
    r[i] = data_.gradient(work_.tag(v), work_.vertex(v)).dot(xdot[static_cast<std::size_t>(v)]);
  }
  return r;
}

Eigen::VectorXd MovingMeshHeatSystem::full_state(double t, const Eigen::VectorXd& yI) {
  if (yI.size() != n_interior_) throw InvalidParameter("full_state: size mismatch");
  Eigen::VectorXd U(work_.num_vertices());
  U.head(n_interior_) = yI;
  U.tail(work_.num_vertices() - n_interior_) = boundary_values(t);
  return U;
}

void MovingMeshHeatSystem::mass(double t, SpMat& M) {
  move_to(t);
  M = assemble_mass(work_).leftCols(n_interior_);
}

void MovingMeshHeatSystem::rhs(double t, const Eigen::VectorXd& yI, Eigen::VectorXd& f) {
  const Eigen::VectorXd U = full_state(t, yI);
  f = assemble_rhs(work_, U, path_.velocities(), flux_);
  const int nb = work_.num_vertices() - n_interior_;
  if (nb > 0) {
    const Eigen::VectorXd gdot = boundary_rates(t);
    if (gdot.cwiseAbs().maxCoeff() > 0.0) {
      f -= assemble_mass(work_).rightCols(nb) * gdot;
    }
  }
}

void MovingMeshHeatSystem::jacobian(double t, const Eigen::VectorXd& yI, SpMat& J) {
  const Eigen::VectorXd U = full_state(t, yI);
  J = assemble_rhs_jacobian(work_, U, path_.velocities(), flux_).leftCols(n_interior_);
}

Eigen::VectorXd integrate_heat_step(const TriMesh& mesh0, const TriMesh& mesh1, double t0,
                                    double t1, const PdeFlux& flux, const DirichletData& data,
                                    const Eigen::VectorXd& U0, const IntegratorConfig& cfg,
                                    IntegrateStats* stats) {
  if (U0.size() != mesh0.num_vertices()) throw InvalidParameter("integrate_heat_step: U0 size");
  MovingMeshHeatSystem sys(mesh0, mesh1, t0, t1, flux, data);
  const int ni = mesh0.num_interior();
  Eigen::VectorXd yI = U0.head(ni);
  if (ni > 0) {
    yI = integrate_interval(sys, yI, t0, t1, cfg, stats);
  }
  return sys.full_state(t1, yI);
}

}  // namespace mmfb
