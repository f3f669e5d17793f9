#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mmfb/boundary_update.hpp"
#include "mmfb/mmpde.hpp"
#include "mmfb/problems.hpp"

namespace mmfb {

struct SolverConfig {
  std::string problem;     // catalog name
  std::string mesh_file;   // optional: overrides the catalog mesh source
  MeshLevel level = MeshLevel::Medium;
  std::string data_dir;
  std::optional<double> lambda_override;
  std::optional<double> p_override;

  double tau = 1e-5;
  double dt_max = 1e-3;
  double stop_ratio = 1e-4;
  RecoveryStrategy recovery = RecoveryStrategy::least_squares();
  IntegratorConfig integrator{};       // physical PDE integrator
  IntegratorConfig mesh_integrator{};  // mesh-flow integrator

  // Nonsingularity floor for the boundary update, relative to the initial
  // minimum element height.
  double floor_rel = 1e-3;
  int max_retries = 20;
  int max_steps = 200000;
  double max_time = std::numeric_limits<double>::infinity();
  std::vector<double> snapshot_times;

  SolverConfig() {
    integrator.rtol = 1e-6;
    integrator.atol = 1e-8;
    mesh_integrator.rtol = 1e-6;
    mesh_integrator.atol = 1e-8;
  }
};

enum class Termination { Converged, MaxSteps, MaxTime, Error };
std::string to_string(Termination t);

struct StepRecord {
  double t = 0.0;          // start of the outer step (final row: end time)
  double dt = 0.0;         // outer step actually taken (0 on the final row)
  double max_speed = 0.0;  // max |v| over Gamma2 at time t
  double min_height = 0.0; // minimum element height at time t
  int retries = 0;
  double mesh_energy = 0.0;     // I_h at time t
  double cost = 0.0;            // J(Omega) at time t
};

struct Snapshot {
  double t = 0.0;
  TriMesh mesh;
  Eigen::VectorXd u;
};

struct RunDiagnostics {
  std::vector<StepRecord> records;
  std::vector<Snapshot> snapshots;
  Termination termination = Termination::Error;
  std::string error_message;
  int outer_steps = 0;
  double t_final = 0.0;
  double initial_max_speed = 0.0;
  double final_max_speed = 0.0;
  std::optional<TriMesh> final_mesh;
  Eigen::VectorXd final_u;
};

// The pseudo-transient outer loop: recover boundary fields, pick the time
// step, update the free boundary (with retry), move the interior mesh,
// integrate the PDE on the mesh path; repeat until the maximum boundary
// speed has dropped below stop_ratio times its initial value (or a step/time
// budget is hit). Module errors terminate the run with Termination::Error
// and the diagnostics collected so far.
RunDiagnostics run(const SolverConfig& cfg);

// Mean signed and mean absolute deviation of the Gamma2 vertex radii from
// 0.5 (the accuracy-test steady boundary).
struct RadiusError {
  double signed_mean = 0.0;
  double mean_abs = 0.0;
};
RadiusError radius_error(const TriMesh& mesh);

// Shape-energy diagnostic J = sum_K |K| (|grad u_h|^2 + lambda(centroid)^2).
double cost_functional(const TriMesh& mesh, const Eigen::VectorXd& U,
                       const std::function<double(const Vec2&)>& lambda);

// Distance from each Gamma2 vertex to the Gamma1 boundary polyline.
std::vector<double> gamma2_to_gamma1_distances(const TriMesh& mesh);
double mean_gamma2_to_gamma1_distance(const TriMesh& mesh);

// Writes history.csv, run.json and the snapshot mesh/solution files.
void export_run(const RunDiagnostics& diag, const SolverConfig& cfg, const std::string& dir);

// Accuracy-test order study: runs the annular accuracy problem on a sequence
// of meshes with both recovery strategies and reports the mean absolute
// boundary-location error per mesh plus fitted log-log slopes.
struct ConvergenceRow {
  MeshLevel level = MeshLevel::Medium;
  int num_elements = 0;
  double h = 0.0;
  double err_lsq = 0.0;
  double err_avg = 0.0;
};
struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double slope_lsq = 0.0;
  double slope_avg = 0.0;
};
ConvergenceStudy convergence_study(const std::vector<MeshLevel>& levels,
                                   const SolverConfig& base);

}  // namespace mmfb
