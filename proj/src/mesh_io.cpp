#include "mmfb/mesh_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

namespace mmfb {

namespace {

// Next content line, skipping blanks and '#' comments.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;
    if (line[i] == '#') continue;
    return true;
  }
  return false;
}

[[noreturn]] void parse_fail(const std::string& origin, int lineno, const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace

TriMesh read_mesh(std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;
  if (!next_line(in, line, lineno)) parse_fail(origin, lineno, "missing header line");
  long nv = 0, ne = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> ne) || nv < 3 || ne < 1) {
      parse_fail(origin, lineno, "bad header (expected vertex and element counts)");
    }
  }

  std::vector<Vec2> verts;
  std::vector<VertexTag> tags;
  verts.reserve(static_cast<std::size_t>(nv));
  tags.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!next_line(in, line, lineno)) parse_fail(origin, lineno, "unexpected end of node section");
    std::istringstream ss(line);
    long idx = 0;
    double x = 0.0, y = 0.0;
    int marker = -1;
    if (!(ss >> idx >> x >> y >> marker)) parse_fail(origin, lineno, "malformed node line");
    if (idx != i + 1) {
      parse_fail(origin, lineno,
                 "node index " + std::to_string(idx) + " (expected " + std::to_string(i + 1) + ")");
    }
    if (marker < 0 || marker > 2) parse_fail(origin, lineno, "node marker not in {0,1,2}");
    verts.emplace_back(x, y);
    tags.push_back(static_cast<VertexTag>(marker));
  }

  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(ne));
  for (long k = 0; k < ne; ++k) {
    if (!next_line(in, line, lineno))
      parse_fail(origin, lineno, "unexpected end of element section");
    std::istringstream ss(line);
    long idx = 0, a = 0, b = 0, c = 0;
    if (!(ss >> idx >> a >> b >> c)) parse_fail(origin, lineno, "malformed element line");
    if (idx != k + 1) {
      parse_fail(origin, lineno, "element index " + std::to_string(idx) + " (expected " +
                                     std::to_string(k + 1) + ")");
    }
    if (a < 1 || a > nv || b < 1 || b > nv || c < 1 || c > nv) {
      parse_fail(origin, lineno, "element vertex index out of range");
    }
    tris.push_back({static_cast<int>(a - 1), static_cast<int>(b - 1), static_cast<int>(c - 1)});
  }
  return TriMesh::create(std::move(verts), std::move(tris), std::move(tags));
}

TriMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  return read_mesh(in, path);
}

void write_mesh(const TriMesh& mesh, std::ostream& out) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d %d\n", mesh.num_vertices(), mesh.num_elements());
  out << buf;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    const Vec2& x = mesh.vertex(i);
    std::snprintf(buf, sizeof(buf), "%d %.17g %.17g %d\n", i + 1, x.x(), x.y(),
                  static_cast<int>(mesh.tag(i)));
    out << buf;
  }
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const auto& t = mesh.triangle(k);
    std::snprintf(buf, sizeof(buf), "%d %d %d %d\n", k + 1, t[0] + 1, t[1] + 1, t[2] + 1);
    out << buf;
  }
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open mesh file for writing: " + path);
  write_mesh(mesh, out);
  if (!out) throw IoError("failed writing mesh file: " + path);
}

TriMesh generate_radial_mesh(const std::function<double(double)>& r_inner,
                             const std::function<double(double)>& r_outer, int n_radial,
                             int n_angular, VertexTag inner_tag, VertexTag outer_tag) {
  if (n_radial < 1 || n_angular < 3) {
    throw InvalidParameter("generate_radial_mesh: need n_radial >= 1 and n_angular >= 3");
  }
  if (inner_tag == VertexTag::Interior || outer_tag == VertexTag::Interior) {
    throw InvalidParameter("generate_radial_mesh: ring tags must be boundary tags");
  }

  std::vector<Vec2> verts;
  std::vector<VertexTag> tags;
  verts.reserve(static_cast<std::size_t>((n_radial + 1) * n_angular));
  for (int i = 0; i <= n_radial; ++i) {
    const double s = static_cast<double>(i) / n_radial;
    for (int j = 0; j < n_angular; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / n_angular;
      const double ri = r_inner(theta);
      const double ro = r_outer(theta);
      if (!(0.0 < ri && ri < ro)) {
        throw InvalidParameter("generate_radial_mesh: need 0 < r_inner(theta) < r_outer(theta)");
      }
      const double r = ri + s * (ro - ri);
      verts.emplace_back(r * std::cos(theta), r * std::sin(theta));
      tags.push_back(i == 0 ? inner_tag : (i == n_radial ? outer_tag : VertexTag::Interior));
    }
  }

  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * n_radial * n_angular));
  auto vid = [n_angular](int ring, int j) { return ring * n_angular + (j % n_angular); };
  for (int i = 0; i < n_radial; ++i) {
    for (int j = 0; j < n_angular; ++j) {
      const int v00 = vid(i, j), v01 = vid(i, j + 1);
      const int v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1);
      // Uniform diagonal: every interior vertex touches exactly 6 elements.
      tris.push_back({v00, v10, v11});
      tris.push_back({v00, v11, v01});
    }
  }
  return TriMesh::create(std::move(verts), std::move(tris), std::move(tags));
}

TriMesh generate_annulus(double r_inner, double r_outer, int n_radial, int n_angular,
                         VertexTag inner_tag, VertexTag outer_tag) {
  if (!(0.0 < r_inner && r_inner < r_outer)) {
    throw InvalidParameter("generate_annulus: need 0 < r_inner < r_outer");
  }
  return generate_radial_mesh([r_inner](double) { return r_inner; },
                              [r_outer](double) { return r_outer; }, n_radial, n_angular,
                              inner_tag, outer_tag);
}

}  // namespace mmfb
