#include "mmfb/problems.hpp"

#include <cmath>
#include <cstdlib>

#include "mmfb/mesh_io.hpp"

#ifndef MMFB_DEFAULT_DATA_DIR
#define MMFB_DEFAULT_DATA_DIR "data"
#endif

namespace mmfb {

namespace {

double lambda_ex1() { return -2.0 / std::log(0.6); }

std::function<double(const Vec2&)> constant(double v) {
  return [v](const Vec2&) { return v; };
}

struct AnnulusLevels {
  int nr_coarse, na_coarse, nr_medium, na_medium, nr_fine, na_fine;
  std::pair<int, int> pick(MeshLevel l) const {
    switch (l) {
      case MeshLevel::Coarse:
        return {nr_coarse, na_coarse};
      case MeshLevel::Medium:
        return {nr_medium, na_medium};
      case MeshLevel::Fine:
        return {nr_fine, na_fine};
    }
    return {nr_medium, na_medium};
  }
};

std::string mesh_path(const CatalogOptions& opt, const std::string& stem) {
  return resolve_data_dir(opt.data_dir) + "/" + stem + "_" + to_string(opt.level) + ".mesh";
}

double obstacle_height(const Vec2& x) {
  const double s = 1.0 - x.squaredNorm();
  return s > 0.0 ? std::sqrt(s) : 0.0;
}

Vec2 obstacle_grad(const Vec2& x) {
  const double s = 1.0 - x.squaredNorm();
  if (s <= 0.0) return Vec2::Zero();
  return -x / std::sqrt(s);
}

ProblemSpec base_bernoulli(std::string name, ProblemKind kind) {
  ProblemSpec p;
  p.name = std::move(name);
  p.kind = kind;
  p.flux = PdeFlux::laplace();
  p.dirichlet.gamma1 = constant(1.0);
  p.dirichlet.gamma2 = constant(0.0);
  p.initial_condition = constant(0.0);
  return p;
}

}  // namespace

std::string to_string(MeshLevel level) {
  switch (level) {
    case MeshLevel::Coarse:
      return "coarse";
    case MeshLevel::Medium:
      return "medium";
    case MeshLevel::Fine:
      return "fine";
  }
  return "medium";
}

MeshLevel mesh_level_from_string(const std::string& s) {
  if (s == "coarse") return MeshLevel::Coarse;
  if (s == "medium") return MeshLevel::Medium;
  if (s == "fine") return MeshLevel::Fine;
  throw InvalidParameter("unknown mesh level: " + s);
}

std::string resolve_data_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("MMFB_DATA_DIR"); env && *env) return env;
  return MMFB_DEFAULT_DATA_DIR;
}

std::vector<std::string> catalog_names() {
  return {"ex1_annulus",        "ex1_wavy", "ex2_tshape",         "ex3_two_blobs",
          "ex4_lshape_interior", "ex5_variable_lambda", "ex6_plaplace", "ex7_obstacle"};
}

ProblemSpec problem_catalog(const std::string& name, const CatalogOptions& opt) {
  const AnnulusLevels ex1_levels{5, 48, 10, 96, 20, 192};

  ProblemSpec p;
  if (name == "ex1_annulus" || name == "ex5_variable_lambda") {
    p = base_bernoulli(name, ProblemKind::Exterior);
    if (name == "ex1_annulus") {
      p.datum = constant(lambda_ex1());
    } else {
      p.datum = [](const Vec2& x) {
        return lambda_ex1() * (1.0 - 0.5 * std::sin(10.0 * std::atan2(x.y(), x.x())));
      };
    }
    auto [nr, na] = ex1_levels.pick(opt.level);
    p.make_mesh = [nr, na]() {
      return generate_annulus(0.3, 0.6, nr, na, VertexTag::Gamma1Fixed, VertexTag::Gamma2Free);
    };
  } else if (name == "ex1_wavy") {
    p = base_bernoulli(name, ProblemKind::Exterior);
    p.datum = constant(lambda_ex1());
    const AnnulusLevels levels{5, 48, 9, 88, 18, 176};
    auto [nr, na] = levels.pick(opt.level);
    p.make_mesh = [nr, na]() {
      return generate_radial_mesh(
          [](double) { return 0.3; },
          [](double theta) { return 0.5 + 0.1 * std::sin(5.0 * theta); }, nr, na,
          VertexTag::Gamma1Fixed, VertexTag::Gamma2Free);
    };
  } else if (name == "ex2_tshape" || name == "ex6_plaplace") {
    p = base_bernoulli(name, ProblemKind::Exterior);
    p.datum = constant(5.0);
    if (name == "ex6_plaplace") {
      p.flux = PdeFlux::p_laplace(opt.p_override.value_or(1.5));
    }
    const std::string path = mesh_path(opt, "tshape");
    p.make_mesh = [path]() { return load_mesh(path); };
  } else if (name == "ex3_two_blobs") {
    p = base_bernoulli(name, ProblemKind::Exterior);
    p.datum = constant(1.5);
    const std::string path = mesh_path(opt, "twoblobs");
    p.make_mesh = [path]() { return load_mesh(path); };
  } else if (name == "ex4_lshape_interior") {
    p = base_bernoulli(name, ProblemKind::Interior);
    p.datum = constant(0.9);
    const std::string path = mesh_path(opt, "lshape");
    p.make_mesh = [path]() { return load_mesh(path); };
  } else if (name == "ex7_obstacle") {
    p.name = name;
    p.kind = ProblemKind::Obstacle;
    p.flux = PdeFlux::minimal_surface();
    p.dirichlet.gamma1 = obstacle_height;
    p.dirichlet.gamma2 = obstacle_height;
    p.dirichlet.grad_gamma1 = obstacle_grad;
    p.dirichlet.grad_gamma2 = obstacle_grad;
    p.datum = constant(0.0);
    p.obstacle_gradient = obstacle_grad;
    p.initial_condition = constant(0.0);
    const AnnulusLevels levels{6, 44, 9, 66, 14, 104};
    auto [nr, na] = levels.pick(opt.level);
    p.make_mesh = [nr, na]() {
      return generate_annulus(0.8, 2.0, nr, na, VertexTag::Gamma2Free, VertexTag::Gamma1Fixed);
    };
  } else {
    throw UnknownProblem("unknown problem: " + name);
  }

  if (opt.lambda_override) {
    if (p.kind == ProblemKind::Obstacle) {
      throw InvalidParameter("lambda override does not apply to the obstacle problem");
    }
    if (!(*opt.lambda_override > 0.0)) {
      throw InvalidParameter("lambda must be positive for Bernoulli problems");
    }
    p.datum = constant(*opt.lambda_override);
  }
  if (opt.p_override && name != "ex6_plaplace") {
    throw InvalidParameter("the p exponent only applies to ex6_plaplace");
  }
  return p;
}

}  // namespace mmfb
