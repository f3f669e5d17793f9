#include "mmfb/mmpde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "mmfb/recovery.hpp"

namespace mmfb {

namespace {

// G(J, det J) and the element's local velocity rows [v1^T; v2^T], v0 = -(v1+v2).
struct LocalVelocities {
  double G = 0.0;
  std::array<Vec2, 3> v;
};

LocalVelocities local_velocities(const ElementGeometry& geo) {
  const Mat2 ehat = ReferenceElement::edge_matrix();
  const double detE = 2.0 * geo.area;
  Mat2 einv;
  einv << geo.edge_matrix(1, 1), -geo.edge_matrix(0, 1), -geo.edge_matrix(1, 0),
      geo.edge_matrix(0, 0);
  einv /= detE;

  const Mat2& J = geo.jacobian_to_reference;
  const double tr = (J * J.transpose()).trace();
  const double detJ = J.determinant();
  if (!(detJ > 0.0)) throw DegenerateElement("non-positive reference-map determinant");

  LocalVelocities out;
  out.G = std::pow(tr, 1.5) / 3.0 + (std::pow(2.0, 1.5) / 3.0) * std::pow(detJ, 1.5);
  const Mat2 dG_dJ = std::sqrt(tr) * J.transpose();
  const double dG_ddet = std::sqrt(2.0) * std::sqrt(detJ);
  const double det_ehat = ehat.determinant();

  const Mat2 rows = -out.G * einv + einv * dG_dJ * ehat * einv +
                    (dG_ddet * det_ehat / detE) * einv;
  out.v[1] = rows.row(0).transpose();
  out.v[2] = rows.row(1).transpose();
  out.v[0] = -(out.v[1] + out.v[2]);
  return out;
}

std::vector<Vec2> raw_velocities(const TriMesh& mesh, double tau) {
  std::vector<Vec2> vel(static_cast<std::size_t>(mesh.num_vertices()), Vec2::Zero());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementGeometry geo = mesh.element_geometry(k);
    const LocalVelocities lv = local_velocities(geo);
    const auto& t = mesh.triangle(k);
    for (int m = 0; m < 3; ++m) {
      vel[static_cast<std::size_t>(t[static_cast<std::size_t>(m)])] +=
          (geo.area / tau) * lv.v[static_cast<std::size_t>(m)];
    }
  }
  return vel;
}

void apply_boundary_policy(const TriMesh& mesh, std::vector<Vec2>& vel) {
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    switch (mesh.tag(i)) {
      case VertexTag::Interior:
        break;
      case VertexTag::Gamma1Fixed:
        vel[static_cast<std::size_t>(i)].setZero();
        break;
      case VertexTag::Gamma2Free: {
        const Vec2 n = recover_normal(mesh, i);
        Vec2& v = vel[static_cast<std::size_t>(i)];
        v -= v.dot(n) * n;
        break;
      }
    }
  }
}

// Gradient flow of the mesh energy as an ODE over all vertex coordinates,
// with a compressed (distance-2 colored) finite-difference Jacobian.
class MeshFlowSystem : public ImplicitOdeSystem {
 public:
  MeshFlowSystem(const TriMesh& mesh, const MmpdeConfig& cfg)
      : work_(mesh), cfg_(cfg), n_(2 * mesh.num_vertices()) {
    build_coloring();
    double area = 0.0;
    for (int k = 0; k < mesh.num_elements(); ++k) area += mesh.signed_area(k);
    fd_scale_ = std::sqrt(std::max(area / std::max(1, mesh.num_elements()), 1e-30));
  }

  int size() const override { return n_; }

  void rhs(double /*t*/, const Eigen::VectorXd& y, Eigen::VectorXd& f) override {
    eval(y, f);
  }

  void jacobian(double /*t*/, const Eigen::VectorXd& y, Eigen::SparseMatrix<double>& J) override {
    Eigen::VectorXd base(n_), pert(n_);
    eval(y, base);
    const double delta = 1e-7 * fd_scale_;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(adj_.size() * 4);
    Eigen::VectorXd yp = y;
    for (int color = 0; color < num_colors_; ++color) {
      for (int comp = 0; comp < 2; ++comp) {
        for (int v : color_members_[static_cast<std::size_t>(color)]) yp[2 * v + comp] += delta;
        eval(yp, pert);
        for (int v : color_members_[static_cast<std::size_t>(color)]) {
          for (int w : adj_[static_cast<std::size_t>(v)]) {
            for (int r = 0; r < 2; ++r) {
              trips.emplace_back(2 * w + r, 2 * v + comp,
                                 (pert[2 * w + r] - base[2 * w + r]) / delta);
            }
          }
          yp[2 * v + comp] = y[2 * v + comp];
        }
      }
    }
    J.resize(n_, n_);
    J.setFromTriplets(trips.begin(), trips.end());
  }

  TriMesh& mesh_at(const Eigen::VectorXd& y) {
    set_state(y);
    return work_;
  }

  static Eigen::VectorXd pack(const TriMesh& mesh) {
    Eigen::VectorXd y(2 * mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      y[2 * i] = mesh.vertex(i).x();
      y[2 * i + 1] = mesh.vertex(i).y();
    }
    return y;
  }

 private:
  void set_state(const Eigen::VectorXd& y) {
    for (int i = 0; i < work_.num_vertices(); ++i) {
      work_.set_position(i, Vec2(y[2 * i], y[2 * i + 1]));
    }
  }

  void eval(const Eigen::VectorXd& y, Eigen::VectorXd& f) {
    set_state(y);
    auto vel = raw_velocities(work_, cfg_.tau);
    apply_boundary_policy(work_, vel);
    f.resize(n_);
    for (int i = 0; i < work_.num_vertices(); ++i) {
      f[2 * i] = vel[static_cast<std::size_t>(i)].x();
      f[2 * i + 1] = vel[static_cast<std::size_t>(i)].y();
    }
  }

  void build_coloring() {
    const int nv = work_.num_vertices();
    adj_.assign(static_cast<std::size_t>(nv), {});
    for (int i = 0; i < nv; ++i) {
      std::set<int> nb;
      for (int k : work_.patch(i)) {
        for (int w : work_.triangle(k)) nb.insert(w);
      }
      nb.insert(i);
      adj_[static_cast<std::size_t>(i)].assign(nb.begin(), nb.end());
    }
    // Greedy distance-2 coloring: columns sharing a row must differ.
    std::vector<int> color(static_cast<std::size_t>(nv), -1);
    num_colors_ = 0;
    std::vector<char> used;
    for (int v = 0; v < nv; ++v) {
      used.assign(static_cast<std::size_t>(num_colors_) + 1, 0);
      for (int w : adj_[static_cast<std::size_t>(v)]) {
        for (int u : adj_[static_cast<std::size_t>(w)]) {
          if (color[static_cast<std::size_t>(u)] >= 0) {
            used[static_cast<std::size_t>(color[static_cast<std::size_t>(u)])] = 1;
          }
        }
      }
      int c = 0;
      while (c < num_colors_ && used[static_cast<std::size_t>(c)]) ++c;
      color[static_cast<std::size_t>(v)] = c;
      num_colors_ = std::max(num_colors_, c + 1);
    }
    color_members_.assign(static_cast<std::size_t>(num_colors_), {});
    for (int v = 0; v < nv; ++v) {
      color_members_[static_cast<std::size_t>(color[static_cast<std::size_t>(v)])].push_back(v);
    }
  }

  TriMesh work_;
  MmpdeConfig cfg_;
  int n_;
  double fd_scale_ = 1.0;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<int>> color_members_;
  int num_colors_ = 0;
};

Vec2 closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return a;
  const double s = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return a + s * d;
}

}  // namespace

MeshEnergyReport mesh_energy(const TriMesh& mesh) {
  MeshEnergyReport rep;
  rep.element_contributions.resize(static_cast<std::size_t>(mesh.num_elements()));
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementGeometry geo = mesh.element_geometry(k);
    const double c = geo.area * local_velocities(geo).G;
    rep.element_contributions[static_cast<std::size_t>(k)] = c;
    rep.energy += c;
  }
  const auto vel = raw_velocities(mesh, 1.0);  // tau = 1: velocity = -dI_h/dx
  for (const Vec2& v : vel) {
    rep.max_nodal_gradient_norm = std::max(rep.max_nodal_gradient_norm, v.norm());
  }
  return rep;
}

double mesh_energy_value(const TriMesh& mesh) {
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementGeometry geo = mesh.element_geometry(k);
    s += geo.area * local_velocities(geo).G;
  }
  return s;
}

std::vector<Vec2> energy_gradient_velocities(const TriMesh& mesh, double tau) {
  if (!(tau > 0.0)) throw InvalidParameter("tau must be positive");
  return raw_velocities(mesh, tau);
}

std::vector<Vec2> nodal_velocities(const TriMesh& mesh, const MmpdeConfig& cfg) {
  auto vel = energy_gradient_velocities(mesh, cfg.tau);
  apply_boundary_policy(mesh, vel);
  return vel;
}

TriMesh move_mesh(const TriMesh& mesh_tilde, const MmpdeConfig& cfg, double horizon,
                  std::vector<double>* energy_trace) {
  if (!(horizon > 0.0)) throw InvalidParameter("move_mesh: horizon must be positive");
  if (!mesh_tilde.is_nonsingular(0.0)) {
    throw InvalidParameter("move_mesh: input mesh is singular");
  }

  MeshFlowSystem sys(mesh_tilde, cfg);
  Eigen::VectorXd y0 = MeshFlowSystem::pack(mesh_tilde);

  // First internal step sized so the initial displacement stays a fraction of
  // the minimum element height; near equilibrium this is the whole horizon.
  IntegratorConfig icfg = cfg.integrator;
  if (icfg.dt_initial <= 0.0 && icfg.dt_fixed <= 0.0) {
    double vmax = 0.0;
    for (const Vec2& v : nodal_velocities(mesh_tilde, cfg)) vmax = std::max(vmax, v.norm());
    icfg.dt_initial =
        vmax > 0.0 ? std::min(horizon, 0.2 * mesh_tilde.min_height() / vmax) : horizon;
  }

  StepObserver observer;
  TriMesh probe = mesh_tilde;
  if (energy_trace) {
    energy_trace->clear();
    energy_trace->push_back(mesh_energy_value(mesh_tilde));
    observer = [&](double /*t*/, const Eigen::VectorXd& y) {
      for (int i = 0; i < probe.num_vertices(); ++i) {
        probe.set_position(i, Vec2(y[2 * i], y[2 * i + 1]));
      }
      energy_trace->push_back(mesh_energy_value(probe));
    };
  }

  Eigen::VectorXd y1;
  try {
    y1 = integrate_interval(sys, y0, 0.0, horizon, icfg, nullptr, observer);
  } catch (const StageSolveFailure& e) {
    throw MeshFlowFailure(std::string("mesh flow integration failed: ") + e.what());
  } catch (const StepUnderflow& e) {
    throw MeshFlowFailure(std::string("mesh flow integration failed: ") + e.what());
  }

  TriMesh out = mesh_tilde;
  for (int i = 0; i < out.num_vertices(); ++i) {
    out.set_position(i, Vec2(y1[2 * i], y1[2 * i + 1]));
  }

  // Slide-and-project: Gamma2 vertices return to the pre-movement polyline so
  // the free boundary's shape is owned solely by the boundary update.
  std::vector<std::pair<Vec2, Vec2>> segments;
  for (const auto& be : mesh_tilde.boundary_edges()) {
    if (mesh_tilde.tag(be.a) == VertexTag::Gamma2Free &&
        mesh_tilde.tag(be.b) == VertexTag::Gamma2Free) {
      segments.emplace_back(mesh_tilde.vertex(be.a), mesh_tilde.vertex(be.b));
    }
  }
  if (!segments.empty()) {
    for (int i : out.vertices_with_tag(VertexTag::Gamma2Free)) {
      const Vec2 p = out.vertex(i);
      double best = std::numeric_limits<double>::infinity();
      Vec2 best_q = p;
      for (const auto& [a, b] : segments) {
        const Vec2 q = closest_point_on_segment(p, a, b);
        const double d = (p - q).squaredNorm();
        if (d < best) {
          best = d;
          best_q = q;
        }
      }
      out.set_position(i, best_q);
    }
  }

  if (!out.is_nonsingular(0.0)) {
    throw TangledOutput("mesh flow produced a tangled mesh");
  }
  return out;
}

}  // namespace mmfb
