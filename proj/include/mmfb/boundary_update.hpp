#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmfb/mesh.hpp"
#include "mmfb/recovery.hpp"

namespace mmfb {

// Recovered free-boundary fields at the start of an outer step.
struct BoundaryFields {
  std::vector<int> vertices;        // Gamma2 vertex indices
  std::vector<Vec2> normals;        // recovered unit outward normals
  std::vector<double> speeds;       // signed normal speeds v_i
  std::vector<double> normal_derivatives;  // |grad u_h . n| at each vertex
  std::vector<double> data;         // effective datum (lambda part) at each vertex

  double max_speed() const;
  double max_normal_derivative() const;
  double max_datum() const;
};

BoundaryFields recover_boundary_fields(const TriMesh& mesh, const Eigen::VectorXd& U,
                                       const BoundaryLaw& law, const RecoveryStrategy& strategy);

// Time-step cap that keeps the updated boundary within half the minimum
// element height: a_h / (2 (lambda_max + max |du_h/dn|)). Returns +infinity
// when the denominator vanishes (capped by dt_max downstream).
double max_allowed_dt(const TriMesh& mesh, std::span<const double> normal_derivatives,
                      double lambda_max);

struct BoundaryUpdate {
  std::vector<Vec2> positions;  // all vertices; only Gamma2 entries differ
  double dt_used = 0.0;
  double max_speed = 0.0;
  int retries = 0;
};

// One explicit Euler step of the free boundary: x_i += dt * v_i * n_i for
// every Gamma2 vertex; all other vertices unchanged.
BoundaryUpdate euler_update(const TriMesh& mesh, const Eigen::VectorXd& U, const BoundaryLaw& law,
                            double dt, const RecoveryStrategy& strategy);
BoundaryUpdate euler_update(const TriMesh& mesh, const BoundaryFields& fields, double dt);

// Repeats the Euler update with halved dt until the resulting mesh passes
// is_nonsingular(floor); throws RetryExhausted after max_retries halvings.
// Returns the accepted update and the updated mesh.
std::pair<BoundaryUpdate, TriMesh> update_with_retry(const TriMesh& mesh,
                                                     const Eigen::VectorXd& U,
                                                     const BoundaryLaw& law, double dt_init,
                                                     const RecoveryStrategy& strategy,
                                                     double floor, int max_retries = 20);
std::pair<BoundaryUpdate, TriMesh> update_with_retry(const TriMesh& mesh,
                                                     const BoundaryFields& fields, double dt_init,
                                                     double floor, int max_retries = 20);

}  // namespace mmfb
