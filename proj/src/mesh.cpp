#include "homog/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace homog {

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

std::pair<int, int> sorted_edge(int a, int b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

double Triangulation::signed_area(int elem) const {
  const auto& t = triangles[elem];
  return 0.5 * cross2(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
}

double Triangulation::total_area() const {
  double s = 0.0;
  for (int e = 0; e < element_count(); ++e) s += signed_area(e);
  return s;
}

void Triangulation::finalize() {
  const int nv = vertex_count();
  const int ne = element_count();

  vertex_to_elements.assign(nv, {});
  element_diameters.assign(ne, 0.0);

  // edge -> number of incident elements; an edge seen once is on the boundary
  std::map<std::pair<int, int>, int> edge_count;

  for (int e = 0; e < ne; ++e) {
    const auto& t = triangles[e];
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= nv) throw std::invalid_argument("triangle references missing vertex");
      vertex_to_elements[t[k]].push_back(e);
      edge_count[sorted_edge(t[k], t[(k + 1) % 3])] += 1;
    }
    if (signed_area(e) <= 0.0) throw std::invalid_argument("element with non-positive orientation");
    double d = 0.0;
    for (int k = 0; k < 3; ++k)
      d = std::max(d, (vertices[t[k]] - vertices[t[(k + 1) % 3]]).norm());
    element_diameters[e] = d;
  }

  boundary_vertex.assign(nv, false);
  for (const auto& [edge, count] : edge_count) {
    if (count > 2) throw std::invalid_argument("non-conforming edge shared by more than two elements");
    if (count == 1) {
      boundary_vertex[edge.first] = true;
      boundary_vertex[edge.second] = true;
    }
  }

  free_index.assign(nv, -1);
  free_vertices.clear();
  for (int v = 0; v < nv; ++v) {
    if (!boundary_vertex[v]) {
      free_index[v] = static_cast<int>(free_vertices.size());
      free_vertices.push_back(v);
    }
  }
}

Triangulation build_structured_mesh(int n) {
  if (n < 2) throw std::invalid_argument("build_structured_mesh: need n >= 2 for an interior vertex");
  Triangulation tri;
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      tri.vertices.emplace_back(i * h, j * h);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // both triangles use the lower-left to upper-right diagonal
      tri.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      tri.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  tri.finalize();
  return tri;
}

Triangulation build_crisscross_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_crisscross_mesh: need n >= 1");
  Triangulation tri;
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      tri.vertices.emplace_back(i * h, j * h);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int c = tri.vertex_count();
      tri.vertices.emplace_back((i + 0.5) * h, (j + 0.5) * h);
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      tri.triangles.push_back({v00, v10, c});
      tri.triangles.push_back({v10, v11, c});
      tri.triangles.push_back({v11, v01, c});
      tri.triangles.push_back({v01, v00, c});
    }
  }
  tri.finalize();
  return tri;
}

namespace {

// One red refinement sweep: every triangle is split into four by its edge
// midpoints, children keep the parent's orientation.
Triangulation refine_once(const Triangulation& tri, std::vector<int>& parent_of_child) {
  Triangulation out;
  out.vertices = tri.vertices;
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = sorted_edge(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int id = out.vertex_count();
    out.vertices.emplace_back(0.5 * (tri.vertices[a] + tri.vertices[b]));
    midpoint.emplace(key, id);
    return id;
  };

  parent_of_child.clear();
  for (int e = 0; e < tri.element_count(); ++e) {
    const auto& t = tri.triangles[e];
    const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m02 = mid(t[0], t[2]);
    out.triangles.push_back({t[0], m01, m02});
    out.triangles.push_back({m01, t[1], m12});
    out.triangles.push_back({m02, m12, t[2]});
    out.triangles.push_back({m01, m12, m02});
    for (int k = 0; k < 4; ++k) parent_of_child.push_back(e);
  }
  out.finalize();
  return out;
}

}  // namespace

MeshHierarchy refine_uniform(const Triangulation& coarse, int levels) {
  if (levels < 0) throw std::invalid_argument("refine_uniform: levels must be >= 0");
  MeshHierarchy h;
  h.coarse = coarse;
  h.fine = coarse;
  h.levels = levels;
  h.fine_to_coarse_element.resize(coarse.element_count());
  for (int e = 0; e < coarse.element_count(); ++e) h.fine_to_coarse_element[e] = e;

  for (int l = 0; l < levels; ++l) {
    std::vector<int> parent;
    Triangulation finer = refine_once(h.fine, parent);
    std::vector<int> to_coarse(finer.element_count());
    for (int e = 0; e < finer.element_count(); ++e)
      to_coarse[e] = h.fine_to_coarse_element[parent[e]];
    h.fine = std::move(finer);
    h.fine_to_coarse_element = std::move(to_coarse);
  }

  // refine_once keeps parent vertices at their original indices
  h.coarse_vertex_to_fine_vertex.resize(coarse.vertex_count());
  for (int v = 0; v < coarse.vertex_count(); ++v) {
    h.coarse_vertex_to_fine_vertex[v] = v;
    if ((h.fine.vertices[v] - coarse.vertices[v]).norm() > 0.0)
      throw std::logic_error("refine_uniform: coarse vertex moved during refinement");
  }
  return h;
}

Patch vertex_patch(const MeshHierarchy& h, int coarse_vertex) {
  if (coarse_vertex >= 0 && coarse_vertex < h.coarse.vertex_count() &&
      h.coarse.boundary_vertex[coarse_vertex])
    throw std::invalid_argument("vertex_patch: boundary vertex has no interior patch");
  return vertex_patch_any(h, coarse_vertex);
}

Patch vertex_patch_any(const MeshHierarchy& h, int coarse_vertex) {
  if (coarse_vertex < 0 || coarse_vertex >= h.coarse.vertex_count())
    throw std::invalid_argument("vertex_patch: vertex index out of range");

  Patch p;
  p.center_vertex = coarse_vertex;
  p.elements = h.coarse.vertex_to_elements[coarse_vertex];
  std::sort(p.elements.begin(), p.elements.end());

  std::set<int> patch_elems(p.elements.begin(), p.elements.end());

  // Fine vertices of the patch submesh; those on edges incident to exactly
  // one patch-interior fine element sit on the patch boundary.
  std::set<int> in_closure;
  std::map<std::pair<int, int>, int> edge_count;
  for (int fe = 0; fe < h.fine.element_count(); ++fe) {
    if (!patch_elems.count(h.fine_to_coarse_element[fe])) continue;
    const auto& t = h.fine.triangles[fe];
    for (int k = 0; k < 3; ++k) {
      in_closure.insert(t[k]);
      edge_count[sorted_edge(t[k], t[(k + 1) % 3])] += 1;
    }
  }
  std::set<int> on_rim;
  for (const auto& [edge, count] : edge_count) {
    if (count == 1) {
      on_rim.insert(edge.first);
      on_rim.insert(edge.second);
    }
  }
  for (int v : in_closure) {
    if (on_rim.count(v) || h.fine.boundary_vertex[v]) continue;
    p.fine_interior_dofs.push_back(h.fine.free_index[v]);
  }
  std::sort(p.fine_interior_dofs.begin(), p.fine_interior_dofs.end());
  return p;
}

double shape_regularity(const Triangulation& tri) {
  double worst = 0.0;
  for (int e = 0; e < tri.element_count(); ++e) {
    const auto& t = tri.triangles[e];
    const double a = (tri.vertices[t[1]] - tri.vertices[t[0]]).norm();
    const double b = (tri.vertices[t[2]] - tri.vertices[t[1]]).norm();
    const double c = (tri.vertices[t[0]] - tri.vertices[t[2]]).norm();
    const double s = 0.5 * (a + b + c);
    const double area = tri.signed_area(e);
    if (area <= 0.0) throw std::invalid_argument("shape_regularity: degenerate element");
    const double inradius = area / s;
    worst = std::max(worst, std::max({a, b, c}) / inradius);
  }
  return worst;
}

}  // namespace homog
