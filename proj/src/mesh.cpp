#include "mmfb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace mmfb {

double ReferenceElement::side() { return 2.0 / std::pow(3.0, 0.25); }

std::array<Vec2, 3> ReferenceElement::vertices() {
  const double l = side();
  return {Vec2(0.0, 0.0), Vec2(l, 0.0), Vec2(0.5 * l, 0.5 * std::sqrt(3.0) * l)};
}

Mat2 ReferenceElement::edge_matrix() {
  const auto v = vertices();
  Mat2 e;
  e.col(0) = v[1] - v[0];
  e.col(1) = v[2] - v[0];
  return e;
}

ElementGeometry compute_element_geometry(const Vec2& x0, const Vec2& x1, const Vec2& x2) {
  ElementGeometry g;
  g.edge_matrix.col(0) = x1 - x0;
  g.edge_matrix.col(1) = x2 - x0;
  const double det = g.edge_matrix.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) {
    throw DegenerateElement("element with non-positive area (det=" + std::to_string(det) + ")");
  }
  g.area = 0.5 * det;

  const double e01 = (x1 - x0).norm();
  const double e12 = (x2 - x1).norm();
  const double e20 = (x0 - x2).norm();
  g.min_height = 2.0 * g.area / std::max({e01, e12, e20});

  Mat2 inv;
  inv << g.edge_matrix(1, 1), -g.edge_matrix(0, 1), -g.edge_matrix(1, 0), g.edge_matrix(0, 0);
  inv /= det;
  g.jacobian_to_reference = ReferenceElement::edge_matrix() * inv;

  // grad(phi_i) = perp(x_{i+2} - x_{i+1}) / (2|K|)
  g.basis_gradients[0] = perp(x2 - x1) / det;
  g.basis_gradients[1] = perp(x0 - x2) / det;
  g.basis_gradients[2] = perp(x1 - x0) / det;
  return g;
}

TriMesh TriMesh::create(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                        std::vector<VertexTag> tags) {
  const int nv = static_cast<int>(vertices.size());
  if (tags.size() != vertices.size()) {
    throw InvalidParameter("tag count does not match vertex count");
  }
  for (auto& t : triangles) {
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw InvalidParameter("triangle with repeated vertex");
    }
    for (int v : t) {
      if (v < 0 || v >= nv) throw InvalidParameter("triangle vertex index out of range");
    }
    // Normalize orientation once, at creation.
    Mat2 e;
    e.col(0) = vertices[static_cast<std::size_t>(t[1])] - vertices[static_cast<std::size_t>(t[0])];
    e.col(1) = vertices[static_cast<std::size_t>(t[2])] - vertices[static_cast<std::size_t>(t[0])];
    const double det = e.determinant();
    if (det == 0.0 || !std::isfinite(det)) {
      throw DegenerateElement("collinear triangle in input");
    }
    if (det < 0.0) std::swap(t[1], t[2]);
  }

  // Stable interior-first permutation. new_of_old[i] = new index of input vertex i.
  std::vector<int> new_of_old(vertices.size());
  int next = 0;
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < nv; ++i) {
      const bool interior = tags[static_cast<std::size_t>(i)] == VertexTag::Interior;
      if ((pass == 0) == interior) new_of_old[static_cast<std::size_t>(i)] = next++;
    }
    if (pass == 0 && next == nv) break;
  }

  TriMesh m;
  m.verts_.resize(vertices.size());
  m.tags_.resize(vertices.size());
  m.to_original_.resize(vertices.size());
  for (int i = 0; i < nv; ++i) {
    const int j = new_of_old[static_cast<std::size_t>(i)];
    m.verts_[static_cast<std::size_t>(j)] = vertices[static_cast<std::size_t>(i)];
    m.tags_[static_cast<std::size_t>(j)] = tags[static_cast<std::size_t>(i)];
    m.to_original_[static_cast<std::size_t>(j)] = i;
  }
  m.n_interior_ = static_cast<int>(
      std::count(tags.begin(), tags.end(), VertexTag::Interior));
  m.tris_ = std::move(triangles);
  for (auto& t : m.tris_) {
    for (int& v : t) v = new_of_old[static_cast<std::size_t>(v)];
  }

  m.build_adjacency();

  // Tagged boundary vertices must actually lie on the triangulation boundary.
  for (int i = 0; i < nv; ++i) {
    if (m.tags_[static_cast<std::size_t>(i)] != VertexTag::Interior &&
        m.vertex_bedges_[static_cast<std::size_t>(i)].empty()) {
      throw TagError("vertex " + std::to_string(m.to_original_[static_cast<std::size_t>(i)] + 1) +
                     " tagged as boundary but not on the triangulation boundary");
    }
  }
  return m;
}

void TriMesh::build_adjacency() {
  const std::size_t nv = verts_.size();
  patch_offsets_.assign(nv + 1, 0);
  for (const auto& t : tris_) {
    for (int v : t) ++patch_offsets_[static_cast<std::size_t>(v) + 1];
  }
  for (std::size_t i = 0; i < nv; ++i) patch_offsets_[i + 1] += patch_offsets_[i];
  patch_elems_.resize(tris_.size() * 3);
  std::vector<int> cursor(patch_offsets_.begin(), patch_offsets_.end() - 1);
  for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
    for (int v : tris_[static_cast<std::size_t>(k)]) {
      patch_elems_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(v)]++)] = k;
    }
  }

  // Boundary edges: undirected edges incident to exactly one element. The
  // directed copy stored in the element (a->b with the domain on the left,
  // for positively oriented triangles) is kept.
  std::map<std::pair<int, int>, std::pair<int, int>> count;  // (min,max) -> (count, element)
  for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
    const auto& t = tris_[static_cast<std::size_t>(k)];
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<std::size_t>(e)];
      const int b = t[static_cast<std::size_t>((e + 1) % 3)];
      auto key = std::minmax(a, b);
      auto [it, inserted] = count.try_emplace({key.first, key.second}, 0, k);
      ++it->second.first;
      it->second.second = k;
    }
  }
  bedges_.clear();
  vertex_bedges_.assign(nv, {});
  for (int k = 0; k < static_cast<int>(tris_.size()); ++k) {
    const auto& t = tris_[static_cast<std::size_t>(k)];
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<std::size_t>(e)];
      const int b = t[static_cast<std::size_t>((e + 1) % 3)];
      auto key = std::minmax(a, b);
      if (count.at({key.first, key.second}).first == 1) {
        const int idx = static_cast<int>(bedges_.size());
        bedges_.push_back(BoundaryEdge{a, b, k});
        vertex_bedges_[static_cast<std::size_t>(a)].push_back(idx);
        vertex_bedges_[static_cast<std::size_t>(b)].push_back(idx);
      }
    }
  }
}

void TriMesh::set_positions(std::span<const Vec2> pos) {
  if (pos.size() != verts_.size()) throw InvalidParameter("position count mismatch");
  std::copy(pos.begin(), pos.end(), verts_.begin());
}

ElementGeometry TriMesh::element_geometry(int k) const {
  const auto& t = tris_[check_element(k)];
  return compute_element_geometry(verts_[static_cast<std::size_t>(t[0])],
                                  verts_[static_cast<std::size_t>(t[1])],
                                  verts_[static_cast<std::size_t>(t[2])]);
}

double TriMesh::signed_area(int k) const {
  const auto& t = tris_[check_element(k)];
  const Vec2& x0 = verts_[static_cast<std::size_t>(t[0])];
  const Vec2 d1 = verts_[static_cast<std::size_t>(t[1])] - x0;
  const Vec2 d2 = verts_[static_cast<std::size_t>(t[2])] - x0;
  return 0.5 * (d1.x() * d2.y() - d1.y() * d2.x());
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (int k = 0; k < num_elements(); ++k) s += signed_area(k);
  return s;
}

double TriMesh::min_height() const {
  double h = std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_elements(); ++k) {
    h = std::min(h, element_geometry(k).min_height);
  }
  return h;
}

bool TriMesh::is_nonsingular(double floor) const noexcept {
  try {
    for (int k = 0; k < num_elements(); ++k) {
      if (!(signed_area(k) > 0.0)) return false;
    }
    return min_height() >= floor;
  } catch (const Error&) {
    return false;
  }
}

std::span<const int> TriMesh::patch(int i) const {
  const std::size_t idx = check_vertex(i);
  const int begin = patch_offsets_[idx];
  const int end = patch_offsets_[idx + 1];
  return {patch_elems_.data() + begin, static_cast<std::size_t>(end - begin)};
}

std::vector<int> TriMesh::vertices_with_tag(VertexTag t) const {
  std::vector<int> out;
  for (int i = 0; i < num_vertices(); ++i) {
    if (tags_[static_cast<std::size_t>(i)] == t) out.push_back(i);
  }
  return out;
}

}  // namespace mmfb
