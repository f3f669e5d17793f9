#include "mmfb/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include <Eigen/SparseLU>

namespace mmfb {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct Tableau {
  int s = 0;
  Eigen::MatrixXd A;
  Vec b, c;
  double gamma0 = 0.0;  // real eigenvalue of A, used by the error filter
  double d0 = 0.0;      // f(t_n, y_n) weight of the embedded method
  Vec d;                // stage weights of the embedded method
  int est_order = 0;    // order of the method the estimate controls
};

Tableau radau_iia_5() {
  Tableau t;
  t.s = 3;
  const double s6 = std::sqrt(6.0);
  t.A.resize(3, 3);
  t.A << (88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0,
      (296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0,
      (16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0;
  t.b = t.A.row(2);
  t.c.resize(3);
  t.c << (4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0;
  t.gamma0 = (6.0 + std::cbrt(81.0) - std::cbrt(9.0)) / 30.0;
  // Embedded order-3 companion including the explicit f(t_n, y_n) stage with
  // weight gamma0; remaining weights from the quadrature conditions.
  t.d0 = t.gamma0;
  Eigen::Matrix3d V;
  V.row(0).setOnes();
  V.row(1) = t.c.transpose();
  V.row(2) = t.c.array().square().matrix().transpose();
  Eigen::Vector3d rhs(1.0 - t.d0, 0.5, 1.0 / 3.0);
  t.d = V.fullPivLu().solve(rhs);
  t.est_order = 3;
  return t;
}

Tableau backward_euler() {
  Tableau t;
  t.s = 1;
  t.A.resize(1, 1);
  t.A << 1.0;
  t.b.resize(1);
  t.b << 1.0;
  t.c.resize(1);
  t.c << 1.0;
  t.gamma0 = 1.0;
  // Trapezoidal companion: estimates the O(h^2) local error of the step.
  t.d0 = 0.5;
  t.d.resize(1);
  t.d << 0.5;
  t.est_order = 1;
  return t;
}

const Tableau& tableau_for(IntegratorConfig::Scheme scheme) {
  static const Tableau radau = radau_iia_5();
  static const Tableau be = backward_euler();
  return scheme == IntegratorConfig::Scheme::RadauIIA5 ? radau : be;
}

double inf_norm(const SpMat& m) {
  double best = 0.0;
  Vec acc = Vec::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) acc[it.row()] += std::abs(it.value());
  }
  for (int i = 0; i < acc.size(); ++i) best = std::max(best, acc[i]);
  return best;
}

// Solves the nonlinear stage equations of one implicit RK step with a
// simplified Newton iteration (Jacobian frozen per attempt, one refresh at
// the current iterate before giving up).
class StageSolver {
 public:
  StageSolver(ImplicitOdeSystem& sys, const Tableau& tab, const IntegratorConfig& cfg)
      : sys_(sys), tab_(tab), cfg_(cfg), n_(sys.size()) {}

  bool solve(double t, double h, const Vec& y, Vec& K, int* iters_out, int* jac_evals,
             bool reuse_jacobian = false) {
    // Trial states may leave the domain where the system is evaluable (e.g. a
    // momentarily tangled mesh or a blown-up coefficient); these count as a
    // failed attempt and lead to step reduction by the caller.
    try {
      return solve_impl(t, h, y, K, iters_out, jac_evals, reuse_jacobian);
    } catch (const DegenerateElement&) {
#ifdef MMFB_ODE_TRACE
      std::fprintf(stderr, "  solve: DegenerateElement (h=%.3e)\n", h);
#endif
      return false;
    } catch (const NonpositiveDiffusivity&) {
      return false;
    }
  }

  const SpMat& jacobian() const { return jac_; }

 private:
  bool solve_impl(double t, double h, const Vec& y, Vec& K, int* iters_out, int* jac_evals,
                  bool reuse_jacobian) {
    const int s = tab_.s;
    masses_.resize(static_cast<std::size_t>(s));
    double bnorm = 1.0;
    if (sys_.has_mass()) {
      bnorm = 0.0;
      for (int i = 0; i < s; ++i) {
        sys_.mass(t + tab_.c[i] * h, masses_[static_cast<std::size_t>(i)]);
        bnorm = std::max(bnorm, inf_norm(masses_[static_cast<std::size_t>(i)]));
      }
      bnorm = std::max(bnorm, 1e-300);
    }

    // A retry of the same step (halved h, same state) can keep the Jacobian.
    if (!reuse_jacobian || jac_.rows() != sys_.size()) {
      sys_.jacobian(t, y, jac_);
      if (jac_evals) ++*jac_evals;
    }

    Vec R(s * n_), stage_y(n_), f(n_), dK;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (!factorize(h)) return false;
      double prev_dk_norm = -1.0;
      for (int iter = 0; iter < std::max(1, cfg_.max_newton_iters); ++iter) {
        // Residual R_i = B_i k_i - f(t_i, y + h sum_j a_ij k_j).
        for (int i = 0; i < s; ++i) {
          stage_y = y;
          for (int j = 0; j < s; ++j) {
            if (tab_.A(i, j) != 0.0) stage_y += (h * tab_.A(i, j)) * K.segment(j * n_, n_);
          }
          sys_.rhs(t + tab_.c[i] * h, stage_y, f);
          if (sys_.has_mass()) {
            R.segment(i * n_, n_) =
                masses_[static_cast<std::size_t>(i)] * K.segment(i * n_, n_) - f;
          } else {
            R.segment(i * n_, n_) = K.segment(i * n_, n_) - f;
          }
        }
        const double knorm = std::max(1.0, K.lpNorm<Eigen::Infinity>());
        const double res_tol = cfg_.newton_tol * std::max(1.0, bnorm * knorm);
        if (R.lpNorm<Eigen::Infinity>() <= res_tol) {
          return true;
        }
#ifdef MMFB_ODE_TRACE
        std::fprintf(stderr, "   it=%d res=%.3e tol=%.3e knorm=%.3e\n", iter,
                     R.lpNorm<Eigen::Infinity>(), res_tol, knorm);
#endif
        if (iters_out) ++*iters_out;

        dK = lu_.solve(-R);
        if (!dK.allFinite()) break;
        K += dK;
        const double dk_norm = dK.lpNorm<Eigen::Infinity>();
        if (prev_dk_norm >= 0.0 && dk_norm > 2.0 * prev_dk_norm && dk_norm > res_tol) {
#ifdef MMFB_ODE_TRACE
          std::fprintf(stderr, "  newton diverging iter=%d dk=%.3e prev=%.3e\n", iter, dk_norm, prev_dk_norm);
#endif
          break;  // diverging
        }
        prev_dk_norm = dk_norm;
      }
#ifdef MMFB_ODE_TRACE
      std::fprintf(stderr, "  newton attempt %d failed (h=%.3e)\n", attempt, h);
#endif
      if (attempt == 0) {
        // Refresh the Jacobian at the last stage state and retry.
        stage_y = y;
        for (int j = 0; j < s; ++j) {
          stage_y += (h * tab_.A(s - 1, j)) * K.segment(j * n_, n_);
        }
        sys_.jacobian(t + tab_.c[s - 1] * h, stage_y, jac_);
        if (jac_evals) ++*jac_evals;
      }
    }
    return false;
  }

  bool factorize(double h) {
    const int s = tab_.s;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(s) * s * static_cast<std::size_t>(jac_.nonZeros()) +
                  static_cast<std::size_t>(s) * static_cast<std::size_t>(n_) * 4);
    for (int i = 0; i < s; ++i) {
      if (sys_.has_mass()) {
        const SpMat& B = masses_[static_cast<std::size_t>(i)];
        for (int k = 0; k < B.outerSize(); ++k) {
          for (SpMat::InnerIterator it(B, k); it; ++it) {
            trips.emplace_back(i * n_ + static_cast<int>(it.row()),
                               i * n_ + static_cast<int>(it.col()), it.value());
          }
        }
      } else {
        for (int r = 0; r < n_; ++r) trips.emplace_back(i * n_ + r, i * n_ + r, 1.0);
      }
      for (int j = 0; j < s; ++j) {
        const double w = -h * tab_.A(i, j);
        if (w == 0.0) continue;
        for (int k = 0; k < jac_.outerSize(); ++k) {
          for (SpMat::InnerIterator it(jac_, k); it; ++it) {
            trips.emplace_back(i * n_ + static_cast<int>(it.row()),
                               j * n_ + static_cast<int>(it.col()), w * it.value());
          }
        }
      }
    }
    SpMat W(tab_.s * n_, tab_.s * n_);
    W.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(W);
    return lu_.info() == Eigen::Success;
  }

  ImplicitOdeSystem& sys_;
  const Tableau& tab_;
  const IntegratorConfig& cfg_;
  int n_;
  SpMat jac_;
  std::vector<SpMat> masses_;
  Eigen::SparseLU<SpMat> lu_;
};

}  // namespace

Vec solve_stages(ImplicitOdeSystem& sys, double t, double h, const Vec& y, const Vec& guess,
                 const IntegratorConfig& cfg, int* newton_iters) {
  const Tableau& tab = tableau_for(cfg.scheme);
  if (guess.size() != static_cast<Eigen::Index>(tab.s) * sys.size()) {
    throw InvalidParameter("solve_stages: guess has wrong size");
  }
  Vec K = guess;
  int iters = 0;
  StageSolver solver(sys, tab, cfg);
  if (!solver.solve(t, h, y, K, &iters, nullptr)) {
    throw StageSolveFailure("Newton iteration on the RK stage equations did not converge");
  }
  if (newton_iters) *newton_iters = iters;
  return K;
}

Vec integrate_interval(ImplicitOdeSystem& sys, const Vec& y0, double t0, double t1,
                       const IntegratorConfig& cfg, IntegrateStats* stats,
                       const StepObserver& observer) {
  if (y0.size() != sys.size()) throw InvalidParameter("integrate_interval: state size mismatch");
  if (t1 < t0) throw InvalidParameter("integrate_interval: t1 < t0");
  if (t1 == t0) return y0;

  const Tableau& tab = tableau_for(cfg.scheme);
  const int n = sys.size();
  if (n == 0) return y0;
  const double interval = t1 - t0;
  const double h_min =
      cfg.dt_internal_min > 0.0 ? cfg.dt_internal_min : 1e-12 * interval;
  const double k_exp = 1.0 / (tab.est_order + 1);
  const bool fixed = cfg.dt_fixed > 0.0;

  StageSolver solver(sys, tab, cfg);
  Eigen::SparseLU<SpMat> filter_lu;
  SpMat B0;

  Vec y = y0;
  Vec f0(n);
  Vec K = Vec::Zero(static_cast<Eigen::Index>(tab.s) * n);
  Vec est(n), err_vec(n);

  double t = t0;
  double h = fixed ? cfg.dt_fixed : (cfg.dt_initial > 0.0 ? cfg.dt_initial : interval);
  double h_acc = 0.0, err_acc = 0.0;
  bool have_f0 = false;
  bool first_step = true;
  bool last_rejected = false;
  bool retry_same_state = false;

  while (t < t1 - 1e-14 * interval) {
    h = std::min(h, t1 - t);
    if (!fixed && h < h_min) {
      throw StepUnderflow("internal time step fell below the minimum");
    }

    int iters = 0;
    K.setZero();
    const bool ok = solver.solve(t, h, y, K, &iters, stats ? &stats->jacobian_evals : nullptr,
                                 retry_same_state);
    if (stats) stats->newton_iters += iters;
    if (!ok) {
      if (fixed) {
        throw StageSolveFailure("stage solve failed with a fixed internal step");
      }
      if (stats) ++stats->steps_rejected;
      h *= 0.5;
      retry_same_state = true;
      continue;
    }

    Vec y_new = y;
    for (int i = 0; i < tab.s; ++i) y_new += (h * tab.b[i]) * K.segment(i * n, n);

    double err = 0.0;
    if (!fixed) {
      if (!have_f0) {
        try {
          sys.rhs(t, y, f0);
          have_f0 = true;
        } catch (const DegenerateElement&) {
        } catch (const NonpositiveDiffusivity&) {
        }
        if (!have_f0) {
          if (stats) ++stats->steps_rejected;
          h *= 0.5;
          continue;
        }
      }
      // Filtered embedded estimate in right-hand-side units:
      //   (B0 - h*gamma0*J) e = h (d0 F0 + sum_i (d_i - b_i) B0 k_i).
      if (sys.has_mass()) {
        sys.mass(t, B0);
      } else {
        B0.resize(n, n);
        B0.setIdentity();
      }
      SpMat F = B0 - (h * tab.gamma0) * solver.jacobian();
      filter_lu.compute(F);
      const bool filter_ok = filter_lu.info() == Eigen::Success;

      Vec ksum = Vec::Zero(n);
      for (int i = 0; i < tab.s; ++i) {
        ksum += (tab.d[i] - tab.b[i]) * K.segment(i * n, n);
      }
      ksum = B0 * ksum;
      est = h * (tab.d0 * f0 + ksum);
      err_vec = filter_ok ? filter_lu.solve(est).eval() : est;

      auto scaled_norm = [&](const Vec& e) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
          const double q = e[i] / sc;
          acc += q * q;
        }
        return std::sqrt(acc / std::max(1, n));
      };
      err = scaled_norm(err_vec);

      // Refined estimate for abrupt transients (first step or right after a
      // rejection): replace F0 by the right-hand side at y + e, which is
      // small once the fast components have been damped.
      if (err >= 1.0 && filter_ok && (first_step || last_rejected)) {
        bool ok = true;
        Vec f2;
        try {
          sys.rhs(t, y + err_vec, f2);
        } catch (const DegenerateElement&) {
          ok = false;
        } catch (const NonpositiveDiffusivity&) {
          ok = false;
        }
        if (ok) {
          est = h * (tab.d0 * f2 + ksum);
          err_vec = filter_lu.solve(est);
          err = scaled_norm(err_vec);
        }
      }
    }

#ifdef MMFB_ODE_TRACE
    std::fprintf(stderr, "ode: t=%.6e h=%.3e err=%.3e %s\n", t, h, err,
                 (fixed || err <= 1.0) ? "acc" : "rej");
#endif
    if (fixed || err <= 1.0) {
      t += h;
      y.swap(y_new);
      // Stiffly accurate scheme: the last stage derivative is f(t, y).
      f0 = K.segment((tab.s - 1) * n, n);
      have_f0 = true;
      if (stats) ++stats->steps_accepted;
      if (observer) observer(t, y);
      if (!fixed) {
        const double e = std::max(err, 1e-10);
        double fac = cfg.safety * std::pow(e, -k_exp);
        // Predictive (Gustafsson) limiter from the previous accepted step.
        if (!first_step && err_acc > 0.0 && h_acc > 0.0) {
          const double fac_gus =
              cfg.safety * (h / h_acc) * std::pow(e * e / err_acc, -k_exp);
          fac = std::min(fac, fac_gus);
        }
        fac = std::clamp(fac, cfg.fac_min, cfg.fac_max);
        h_acc = h;
        err_acc = e;
        first_step = false;
        last_rejected = false;
        h *= fac;
      }
      retry_same_state = false;
    } else {
      if (stats) ++stats->steps_rejected;
      last_rejected = true;
      retry_same_state = true;
      const double fac = std::clamp(cfg.safety * std::pow(err, -k_exp), cfg.fac_min, 0.9);
      h *= fac;
    }
  }
  return y;
}

}  // namespace mmfb
