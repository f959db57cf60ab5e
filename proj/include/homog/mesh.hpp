#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace homog {

/// Conforming triangle mesh of the unit square with homogeneous Dirichlet
/// boundary. Triangles are stored with positive orientation; vertex indices
/// are 0-based and the free-dof numbering follows vertex creation order.
struct Triangulation {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary_vertex;
  std::vector<double> element_diameters;
  std::vector<std::vector<int>> vertex_to_elements;

  // free (interior) vertex numbering; free_index[v] == -1 on the boundary
  std::vector<int> free_index;
  std::vector<int> free_vertices;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int element_count() const { return static_cast<int>(triangles.size()); }
  int free_count() const { return static_cast<int>(free_vertices.size()); }

  double signed_area(int elem) const;
  double total_area() const;

  /// Rebuilds derived data (adjacency, boundary flags, diameters, dof maps)
  /// and validates orientation and edge conformity. Must be called after the
  /// vertex/triangle arrays are filled in.
  void finalize();
};

/// Coarse mesh plus a uniformly refined copy with parent/child bookkeeping.
/// Every fine element lies inside exactly one coarse element and every coarse
/// vertex reappears as a fine vertex.
struct MeshHierarchy {
  Triangulation coarse;
  Triangulation fine;
  std::vector<int> fine_to_coarse_element;
  std::vector<int> coarse_vertex_to_fine_vertex;
  int levels = 0;
};

/// Closed star of a coarse vertex: the coarse elements meeting it, plus the
/// fine free vertices strictly inside the open patch (off the patch boundary
/// and off the domain boundary).
struct Patch {
  int center_vertex = -1;
  std::vector<int> elements;
  std::vector<int> fine_interior_dofs;  // fine free-dof indices
};

/// n-by-n grid of square cells, each split along the same diagonal.
/// (n+1)^2 vertices and 2 n^2 right triangles; requires n >= 2 so that at
/// least one interior vertex exists.
Triangulation build_structured_mesh(int n);

/// n-by-n grid of square cells, each split into four triangles by its center
/// vertex. Valid from n = 1 upward; the n = 1 mesh is the canonical
/// single-interior-vertex configuration whose center patch covers the whole
/// domain.
Triangulation build_crisscross_mesh(int n);

/// Red (quadrisection) refinement applied `levels` times. levels == 0 returns
/// the mesh itself with identity parent maps.
MeshHierarchy refine_uniform(const Triangulation& coarse, int levels);

/// Patch of an interior coarse vertex. Boundary vertices are rejected.
Patch vertex_patch(const MeshHierarchy& h, int coarse_vertex);

/// Patch of any coarse vertex. For boundary centers the interior dof set
/// additionally excludes the domain boundary, so the local space is pinned to
/// zero there; such patches complete the subspace splitting of the corrector.
Patch vertex_patch_any(const MeshHierarchy& h, int coarse_vertex);

/// Max over elements of diameter / inradius. Equilateral triangles give
/// 2*sqrt(3), the minimum possible value.
double shape_regularity(const Triangulation& tri);

}  // namespace homog
