#include "mmfb/boundary_update.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mmfb {

namespace {

double vec_max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double BoundaryFields::max_speed() const { return vec_max_abs(speeds); }
double BoundaryFields::max_normal_derivative() const { return vec_max_abs(normal_derivatives); }
double BoundaryFields::max_datum() const { return vec_max_abs(data); }

BoundaryFields recover_boundary_fields(const TriMesh& mesh, const Eigen::VectorXd& U,
                                       const BoundaryLaw& law, const RecoveryStrategy& strategy) {
  BoundaryFields f;
  f.vertices = mesh.vertices_with_tag(VertexTag::Gamma2Free);
  f.normals.reserve(f.vertices.size());
  f.speeds.reserve(f.vertices.size());
  f.normal_derivatives.reserve(f.vertices.size());
  f.data.reserve(f.vertices.size());
  for (int i : f.vertices) {
    const Vec2 n = recover_normal(mesh, i);
    const Vec2 g = recover_gradient(mesh, U, i, strategy);
    const double datum = law.effective_datum(mesh.vertex(i), n);
    f.normals.push_back(n);
    f.normal_derivatives.push_back(std::abs(g.dot(n)));
    f.data.push_back(datum);
    f.speeds.push_back(-g.dot(n) - datum);
  }
  return f;
}

double max_allowed_dt(const TriMesh& mesh, std::span<const double> normal_derivatives,
                      double lambda_max) {
  double nd = 0.0;
  for (double d : normal_derivatives) nd = std::max(nd, std::abs(d));
  const double denom = 2.0 * (std::abs(lambda_max) + nd);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return mesh.min_height() / denom;
}

BoundaryUpdate euler_update(const TriMesh& mesh, const BoundaryFields& fields, double dt) {
  BoundaryUpdate up;
  up.positions.assign(mesh.positions().begin(), mesh.positions().end());
  up.dt_used = dt;
  up.max_speed = fields.max_speed();
  for (std::size_t k = 0; k < fields.vertices.size(); ++k) {
    const std::size_t i = static_cast<std::size_t>(fields.vertices[k]);
    up.positions[i] += dt * fields.speeds[k] * fields.normals[k];
  }
  return up;
}

BoundaryUpdate euler_update(const TriMesh& mesh, const Eigen::VectorXd& U, const BoundaryLaw& law,
                            double dt, const RecoveryStrategy& strategy) {
  return euler_update(mesh, recover_boundary_fields(mesh, U, law, strategy), dt);
}

std::pair<BoundaryUpdate, TriMesh> update_with_retry(const TriMesh& mesh,
                                                     const BoundaryFields& fields, double dt_init,
                                                     double floor, int max_retries) {
  if (!(dt_init > 0.0)) throw InvalidParameter("update_with_retry: dt_init must be positive");
  double dt = dt_init;
  TriMesh trial = mesh;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    BoundaryUpdate up = euler_update(mesh, fields, dt);
    up.retries = attempt;
    trial.set_positions(up.positions);
    if (trial.is_nonsingular(floor)) {
      return {std::move(up), std::move(trial)};
    }
    dt *= 0.5;
  }
  throw RetryExhausted("boundary update still tangles the mesh after " +
                       std::to_string(max_retries) + " halvings");
}

std::pair<BoundaryUpdate, TriMesh> update_with_retry(const TriMesh& mesh,
                                                     const Eigen::VectorXd& U,
                                                     const BoundaryLaw& law, double dt_init,
                                                     const RecoveryStrategy& strategy,
                                                     double floor, int max_retries) {
  return update_with_retry(mesh, recover_boundary_fields(mesh, U, law, strategy), dt_init, floor,
                           max_retries);
}

}  // namespace mmfb
