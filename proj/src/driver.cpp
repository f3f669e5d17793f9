#include "mmfb/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmfb/mesh_io.hpp"

namespace mmfb {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::MaxSteps:
      return "max_steps";
    case Termination::MaxTime:
      return "max_time";
    case Termination::Error:
      return "error";
  }
  return "error";
}

namespace {

ProblemSpec resolve_problem(const SolverConfig& cfg) {
  CatalogOptions opt;
  opt.level = cfg.level;
  opt.data_dir = cfg.data_dir;
  opt.lambda_override = cfg.lambda_override;
  opt.p_override = cfg.p_override;
  ProblemSpec prob = problem_catalog(cfg.problem, opt);
  if (!cfg.mesh_file.empty()) {
    const std::string path = cfg.mesh_file;
    prob.make_mesh = [path]() { return load_mesh(path); };
  }
  return prob;
}

Eigen::VectorXd initial_state(const TriMesh& mesh, const ProblemSpec& prob) {
  Eigen::VectorXd U(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    U[i] = prob.initial_condition ? prob.initial_condition(mesh.vertex(i)) : 0.0;
  }
  apply_dirichlet(mesh, prob.dirichlet, U);
  return U;
}

// Distance of p to the segment [a, b].
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double s = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
  return (p - (a + s * d)).norm();
}

void format_row(std::string& out, const StepRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%d,%.12g,%.12g\n", r.t, r.dt,
                r.max_speed, r.min_height, r.retries, r.mesh_energy, r.cost);
  out += buf;
}

}  // namespace

RadiusError radius_error(const TriMesh& mesh) {
  RadiusError e;
  const auto g2 = mesh.vertices_with_tag(VertexTag::Gamma2Free);
  if (g2.empty()) return e;
  for (int i : g2) {
    const double d = mesh.vertex(i).norm() - 0.5;
    e.signed_mean += d;
    e.mean_abs += std::abs(d);
  }
  e.signed_mean /= static_cast<double>(g2.size());
  e.mean_abs /= static_cast<double>(g2.size());
  return e;
}

double cost_functional(const TriMesh& mesh, const Eigen::VectorXd& U,
                       const std::function<double(const Vec2&)>& lambda) {
  double J = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& t = mesh.triangle(k);
    const ElementGeometry geo = mesh.element_geometry(k);
    const Vec2 g = element_gradient(geo, U[t[0]], U[t[1]], U[t[2]]);
    const Vec2 centroid =
        (mesh.vertex(t[0]) + mesh.vertex(t[1]) + mesh.vertex(t[2])) / 3.0;
    const double lam = lambda ? lambda(centroid) : 0.0;
    J += geo.area * (g.squaredNorm() + lam * lam);
  }
  return J;
}

std::vector<double> gamma2_to_gamma1_distances(const TriMesh& mesh) {
  std::vector<std::pair<Vec2, Vec2>> g1_segments;
  for (const auto& be : mesh.boundary_edges()) {
    if (mesh.tag(be.a) == VertexTag::Gamma1Fixed && mesh.tag(be.b) == VertexTag::Gamma1Fixed) {
      g1_segments.emplace_back(mesh.vertex(be.a), mesh.vertex(be.b));
    }
  }
  std::vector<double> out;
  for (int i : mesh.vertices_with_tag(VertexTag::Gamma2Free)) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : g1_segments) {
      best = std::min(best, point_segment_distance(mesh.vertex(i), a, b));
    }
    out.push_back(best);
  }
  return out;
}

double mean_gamma2_to_gamma1_distance(const TriMesh& mesh) {
  const auto d = gamma2_to_gamma1_distances(mesh);
  if (d.empty()) return 0.0;
  double s = 0.0;
  for (double x : d) s += x;
  return s / static_cast<double>(d.size());
}

RunDiagnostics run(const SolverConfig& cfg) {
  RunDiagnostics diag;
  if (!(cfg.stop_ratio > 0.0 && cfg.stop_ratio <= 1.0)) {
    diag.termination = Termination::Error;
    diag.error_message = "stop_ratio must lie in (0, 1]";
    return diag;
  }
  if (!(cfg.dt_max > 0.0)) {
    diag.termination = Termination::Error;
    diag.error_message = "dt_max must be positive";
    return diag;
  }

  try {
    const ProblemSpec prob = resolve_problem(cfg);
    TriMesh mesh = prob.make_mesh();
    const BoundaryLaw law = prob.boundary_law();

    // Bernoulli problems require a positive datum on the free boundary.
    if (prob.kind != ProblemKind::Obstacle) {
      for (int i : mesh.vertices_with_tag(VertexTag::Gamma2Free)) {
        if (!(law.lambda_at(mesh.vertex(i)) > 0.0)) {
          throw InvalidParameter("Bernoulli datum not positive at a free-boundary vertex");
        }
      }
    }

    Eigen::VectorXd U = initial_state(mesh, prob);
    const double floor = cfg.floor_rel * mesh.min_height();

    MmpdeConfig mmpde;
    mmpde.tau = cfg.tau;
    mmpde.integrator = cfg.mesh_integrator;

    double t = 0.0;
    auto snapshot_due = cfg.snapshot_times;
    std::sort(snapshot_due.begin(), snapshot_due.end());
    auto take_snapshots_at = [&](double time, const TriMesh& m, const Eigen::VectorXd& u) {
      while (!snapshot_due.empty() && snapshot_due.front() <= time * (1.0 + 1e-12)) {
        diag.snapshots.push_back({time, m, u});
        snapshot_due.erase(snapshot_due.begin());
      }
    };
    take_snapshots_at(0.0, mesh, U);

    for (int step = 0;; ++step) {
      const BoundaryFields fields = recover_boundary_fields(mesh, U, law, cfg.recovery);
      const double vmax = fields.max_speed();
      const double a_h = mesh.min_height();
      const double energy = mesh_energy_value(mesh);
      const double cost = cost_functional(mesh, U, prob.datum);
      if (step == 0) diag.initial_max_speed = vmax;
      diag.final_max_speed = vmax;

      auto finish = [&](Termination why) {
        diag.records.push_back({t, 0.0, vmax, a_h, 0, energy, cost});
        diag.termination = why;
        diag.outer_steps = step;
        diag.t_final = t;
        diag.final_mesh = mesh;
        diag.final_u = U;
        take_snapshots_at(t * (1.0 + 1e-9), mesh, U);
      };

      if (diag.initial_max_speed == 0.0 ||
          vmax / diag.initial_max_speed < cfg.stop_ratio) {
        finish(Termination::Converged);
        break;
      }
      if (t >= cfg.max_time * (1.0 - 1e-12)) {
        finish(Termination::MaxTime);
        break;
      }
      if (step >= cfg.max_steps) {
        finish(Termination::MaxSteps);
        break;
      }

      double dt = std::min(cfg.dt_max, max_allowed_dt(mesh, fields.normal_derivatives,
                                                      fields.max_datum()));
      if (std::isfinite(cfg.max_time)) dt = std::min(dt, cfg.max_time - t);
      if (!snapshot_due.empty() && snapshot_due.front() > t && t + dt > snapshot_due.front()) {
        dt = snapshot_due.front() - t;
      }

      auto [update, mesh_tilde] =
          update_with_retry(mesh, fields, dt, floor, cfg.max_retries);
      TriMesh mesh_next = move_mesh(mesh_tilde, mmpde, update.dt_used);
      U = integrate_heat_step(mesh, mesh_next, t, t + update.dt_used, prob.flux, prob.dirichlet,
                              U, cfg.integrator);

      diag.records.push_back(
          {t, update.dt_used, vmax, a_h, update.retries, energy, cost});
      t += update.dt_used;
      mesh = std::move(mesh_next);
      take_snapshots_at(t, mesh, U);
    }
  } catch (const Error& e) {
    diag.termination = Termination::Error;
    diag.error_message = e.what();
  }
  return diag;
}

void export_run(const RunDiagnostics& diag, const SolverConfig& cfg, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

  // Build all file contents first so an unwritable directory leaves nothing
  // half-written behind.
  std::string history = "t,dt,max_speed,min_height,retries,I_h,J\n";
  for (const auto& r : diag.records) format_row(history, r);

  json j;
  j["problem"] = cfg.problem;
  j["mesh_file"] = cfg.mesh_file;
  j["level"] = to_string(cfg.level);
  j["data_dir"] = resolve_data_dir(cfg.data_dir);
  if (cfg.lambda_override) j["lambda"] = *cfg.lambda_override;
  if (cfg.p_override) j["p"] = *cfg.p_override;
  j["tau"] = cfg.tau;
  j["dt_max"] = cfg.dt_max;
  j["stop_ratio"] = cfg.stop_ratio;
  j["recovery"] =
      cfg.recovery.kind == RecoveryStrategy::Kind::QuadraticLeastSquares ? "lsq" : "avg";
  j["stencil_rings"] = cfg.recovery.stencil_rings;
  j["rtol"] = cfg.integrator.rtol;
  j["atol"] = cfg.integrator.atol;
  j["newton_tol"] = cfg.integrator.newton_tol;
  j["floor_rel"] = cfg.floor_rel;
  j["max_retries"] = cfg.max_retries;
  j["max_steps"] = cfg.max_steps;
  if (std::isfinite(cfg.max_time)) j["max_time"] = cfg.max_time;
  j["snapshot_times"] = cfg.snapshot_times;
  j["termination"] = to_string(diag.termination);
  if (!diag.error_message.empty()) j["error"] = diag.error_message;
  j["outer_steps"] = diag.outer_steps;
  j["t_final"] = diag.t_final;
  j["initial_max_speed"] = diag.initial_max_speed;
  j["final_max_speed"] = diag.final_max_speed;

  auto write_file = [&](const std::string& name, const std::string& contents) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw IoError("failed writing " + path.string());
  };

  write_file("history.csv", history);
  write_file("run.json", j.dump(2) + "\n");

  for (std::size_t s = 0; s < diag.snapshots.size(); ++s) {
    const auto& snap = diag.snapshots[s];
    char stem[64];
    std::snprintf(stem, sizeof(stem), "snap_%03zu", s);
    {
      std::ostringstream mesh_text;
      write_mesh(snap.mesh, mesh_text);
      write_file(std::string(stem) + ".mesh", mesh_text.str());
    }
    std::string sol;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d\n", snap.mesh.num_vertices());
    sol += buf;
    for (int i = 0; i < snap.mesh.num_vertices(); ++i) {
      std::snprintf(buf, sizeof(buf), "%d %.17g\n", i + 1, snap.u[i]);
      sol += buf;
    }
    write_file(std::string(stem) + ".u", sol);
  }
}

ConvergenceStudy convergence_study(const std::vector<MeshLevel>& levels,
                                   const SolverConfig& base) {
  ConvergenceStudy study;
  std::vector<std::future<ConvergenceRow>> rows;
  for (MeshLevel level : levels) {
    rows.push_back(std::async(std::launch::async, [&, level]() {
      ConvergenceRow row;
      row.level = level;
      for (auto kind : {RecoveryStrategy::Kind::QuadraticLeastSquares,
                        RecoveryStrategy::Kind::AreaWeightedAverage}) {
        SolverConfig cfg = base;
        cfg.problem = "ex1_annulus";
        cfg.level = level;
        cfg.recovery.kind = kind;
        RunDiagnostics diag = run(cfg);
        if (diag.termination != Termination::Converged || !diag.final_mesh) {
          throw MeshFlowFailure("convergence study run did not converge (" +
                                to_string(diag.termination) + ": " + diag.error_message + ")");
        }
        const double err = radius_error(*diag.final_mesh).mean_abs;
        row.num_elements = diag.final_mesh->num_elements();
        row.h = std::sqrt(diag.final_mesh->total_area() / row.num_elements);
        if (kind == RecoveryStrategy::Kind::QuadraticLeastSquares) {
          row.err_lsq = err;
        } else {
          row.err_avg = err;
        }
      }
      return row;
    }));
  }
  for (auto& f : rows) study.rows.push_back(f.get());

  auto fit_slope = [&](bool lsq) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(study.rows.size());
    for (const auto& r : study.rows) {
      const double x = std::log(r.h);
      const double y = std::log(lsq ? r.err_lsq : r.err_avg);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  study.slope_lsq = fit_slope(true);
  study.slope_avg = fit_slope(false);
  return study;
}

}  // namespace mmfb
