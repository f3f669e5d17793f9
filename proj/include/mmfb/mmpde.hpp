#pragma once

#include <vector>

#include "mmfb/mesh.hpp"
#include "mmfb/ode.hpp"

namespace mmfb {

// Configuration of the mesh-movement gradient flow. Vertices on Gamma1 are
// pinned; vertices on Gamma2 slide along the boundary (normal velocity
// component removed, final positions re-projected onto the pre-movement
// polyline).
struct MmpdeConfig {
  double tau = 1e-5;  // relaxation time of the flow
  IntegratorConfig integrator{};

  MmpdeConfig() {
    integrator.rtol = 1e-6;
    integrator.atol = 1e-8;
    // The flow is a relaxation: allow aggressive step growth.
    integrator.fac_max = 10.0;
  }
};

struct MeshEnergyReport {
  double energy = 0.0;                        // I_h
  std::vector<double> element_contributions;  // |K| G_K, summing to I_h
  double max_nodal_gradient_norm = 0.0;       // max_i |dI_h/dx_i|
};

// Equidistribution/alignment energy of the mesh against the unit-area
// equilateral reference element,
//   I_h = sum_K |K| [ (1/3) tr(J J^T)^{3/2} + (2^{3/2}/3) det(J)^{3/2} ],
// with J the Jacobian of the affine map from K to the reference element.
MeshEnergyReport mesh_energy(const TriMesh& mesh);
double mesh_energy_value(const TriMesh& mesh);

// Raw gradient-flow velocities -(1/tau) dI_h/dx_i from the closed-form local
// element contributions (no boundary policy applied).
std::vector<Vec2> energy_gradient_velocities(const TriMesh& mesh, double tau);

// Velocities with the boundary policy applied: Gamma1 zeroed, Gamma2
// projected onto the local boundary tangent.
std::vector<Vec2> nodal_velocities(const TriMesh& mesh, const MmpdeConfig& cfg);

// Integrates dx/dt = nodal_velocities over the horizon with the configured
// stiff integrator (Jacobian by compressed finite differences), re-projects
// Gamma2 vertices onto the pre-movement Gamma2 polyline and verifies the
// result is nonsingular. Optionally records I_h at accepted internal steps.
TriMesh move_mesh(const TriMesh& mesh_tilde, const MmpdeConfig& cfg, double horizon,
                  std::vector<double>* energy_trace = nullptr);

}  // namespace mmfb
