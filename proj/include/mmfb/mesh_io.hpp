#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "mmfb/mesh.hpp"

namespace mmfb {

// Plain-text mesh format (see docs/formats.md):
//   line 1:              <num_vertices> <num_elements>
//   next num_vertices:   <index> <x> <y> <marker>     marker in {0,1,2}
//   next num_elements:   <index> <v1> <v2> <v3>
// Indices are 1-based and contiguous in ascending order. Blank lines and
// lines starting with '#' are skipped.

TriMesh load_mesh(const std::string& path);
TriMesh read_mesh(std::istream& in, const std::string& origin = "<stream>");

void save_mesh(const TriMesh& mesh, const std::string& path);
void write_mesh(const TriMesh& mesh, std::ostream& out);

// Structured annular triangulation between circles of radius r_inner and
// r_outer centered at the origin: (n_radial+1) rings of n_angular vertices,
// 2*n_radial*n_angular positively oriented elements. Vertices on the inner
// (outer) circle are tagged inner_tag (outer_tag).
TriMesh generate_annulus(double r_inner, double r_outer, int n_radial, int n_angular,
                         VertexTag inner_tag = VertexTag::Gamma1Fixed,
                         VertexTag outer_tag = VertexTag::Gamma2Free);

// Same topology with angle-dependent radii; used for perturbed starts such
// as a wavy outer boundary.
TriMesh generate_radial_mesh(const std::function<double(double)>& r_inner,
                             const std::function<double(double)>& r_outer, int n_radial,
                             int n_angular, VertexTag inner_tag, VertexTag outer_tag);

}  // namespace mmfb
