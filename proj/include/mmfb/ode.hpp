#pragma once

#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mmfb/errors.hpp"

namespace mmfb {

// Implicitly integrated system  M(t) y' = f(t, y)  with sparse operators of
// fixed sparsity pattern. M defaults to the identity (has_mass() == false).
class ImplicitOdeSystem {
 public:
  virtual ~ImplicitOdeSystem() = default;

  virtual int size() const = 0;
  virtual bool has_mass() const { return false; }
  virtual void mass(double /*t*/, Eigen::SparseMatrix<double>& M) {
    M.resize(size(), size());
    M.setIdentity();
  }
  virtual void rhs(double t, const Eigen::VectorXd& y, Eigen::VectorXd& f) = 0;
  virtual void jacobian(double t, const Eigen::VectorXd& y, Eigen::SparseMatrix<double>& J) = 0;
};

struct IntegratorConfig {
  enum class Scheme { RadauIIA5, BackwardEuler };

  Scheme scheme = Scheme::RadauIIA5;
  double rtol = 1e-6;
  double atol = 1e-8;
  double newton_tol = 1e-10;   // absolute stage-residual tolerance, B-norm scaled
  int max_newton_iters = 12;
  // Minimum internal step. 0 means 1e-12 * interval length.
  double dt_internal_min = 0.0;
  // Positive: integrate with this fixed internal step (no adaptivity).
  double dt_fixed = 0.0;
  // Initial internal step; 0 means the whole interval.
  double dt_initial = 0.0;
  double safety = 0.9;
  double fac_min = 0.2;
  double fac_max = 5.0;
};

struct IntegrateStats {
  int steps_accepted = 0;
  int steps_rejected = 0;
  int newton_iters = 0;
  int jacobian_evals = 0;
};

// Called after every accepted internal step with (t, y(t)).
using StepObserver = std::function<void(double, const Eigen::VectorXd&)>;

// Integrates M y' = f over [t0, t1] with the configured implicit Runge-Kutta
// scheme, variable internal steps and a simplified-Newton stage solver.
// Throws StageSolveFailure only after step reduction is exhausted
// (StepUnderflow when the internal step drops below dt_internal_min).
Eigen::VectorXd integrate_interval(ImplicitOdeSystem& sys, const Eigen::VectorXd& y0, double t0,
                                   double t1, const IntegratorConfig& cfg,
                                   IntegrateStats* stats = nullptr,
                                   const StepObserver& observer = nullptr);

// One nonlinear stage solve for a step of size h from (t, y): returns the
// stage derivative block vector K (s*n entries, stage-major) with residual
// B(t_i) k_i - f(t_i, y + h sum_j a_ij k_j) driven below the scaled Newton
// tolerance. Exposed for testing; integrate_interval uses the same path.
// Throws StageSolveFailure if Newton does not converge.
Eigen::VectorXd solve_stages(ImplicitOdeSystem& sys, double t, double h, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& guess, const IntegratorConfig& cfg,
                             int* newton_iters = nullptr);

}  // namespace mmfb
