#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmfb/fem.hpp"
#include "mmfb/flux.hpp"
#include "mmfb/mesh.hpp"
#include "mmfb/recovery.hpp"

namespace mmfb {

enum class ProblemKind { Exterior, Interior, Obstacle };
enum class MeshLevel { Coarse, Medium, Fine };

// A fully specified free-boundary problem instance: domain/mesh source,
// boundary data, the free-boundary datum and the flux.
struct ProblemSpec {
  std::string name;
  ProblemKind kind = ProblemKind::Exterior;
  PdeFlux flux;
  DirichletData dirichlet;
  // Position-only free-boundary datum lambda(x); > 0 for Bernoulli problems,
  // identically 0 for the obstacle problem.
  std::function<double(const Vec2&)> datum;
  // grad psi for the obstacle problem; null otherwise.
  std::function<Vec2(const Vec2&)> obstacle_gradient;
  std::function<double(const Vec2&)> initial_condition;  // default: 0
  std::function<TriMesh()> make_mesh;

  BoundaryLaw boundary_law() const { return {datum, obstacle_gradient}; }
};

struct CatalogOptions {
  MeshLevel level = MeshLevel::Medium;
  // Directory holding the shipped mesh files. Empty: $MMFB_DATA_DIR, then the
  // compiled-in default.
  std::string data_dir;
  std::optional<double> lambda_override;  // replaces the datum by a constant
  std::optional<double> p_override;       // p-Laplacian exponent
};

// The built-in problem catalog. Throws UnknownProblem for unlisted names.
ProblemSpec problem_catalog(const std::string& name, const CatalogOptions& opt = {});

std::vector<std::string> catalog_names();

std::string resolve_data_dir(const std::string& explicit_dir);

std::string to_string(MeshLevel level);
MeshLevel mesh_level_from_string(const std::string& s);

}  // namespace mmfb
