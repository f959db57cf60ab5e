#include "homog/mesh.hpp"

#include "doctest.h"

#include <cmath>
#include <set>

using namespace homog;

TEST_CASE("structured mesh counts and area") {
  Triangulation t = build_structured_mesh(4);
  CHECK(t.vertex_count() == 25);
  CHECK(t.element_count() == 32);
  CHECK(t.free_count() == 9);
  CHECK(t.total_area() == doctest::Approx(1.0).epsilon(1e-14));
  for (int e = 0; e < t.element_count(); ++e) CHECK(t.signed_area(e) > 0.0);

  int boundary = 0;
  for (bool b : t.boundary_vertex) boundary += b ? 1 : 0;
  CHECK(boundary == 16);
}

TEST_CASE("crisscross mesh counts, including the one-cell case") {
  Triangulation one = build_crisscross_mesh(1);
  CHECK(one.vertex_count() == 5);
  CHECK(one.element_count() == 4);
  CHECK(one.free_count() == 1);
  CHECK(one.total_area() == doctest::Approx(1.0).epsilon(1e-14));

  Triangulation two = build_crisscross_mesh(2);
  CHECK(two.vertex_count() == 13);  // (n+1)^2 grid points plus n^2 centers
  CHECK(two.element_count() == 16);
  CHECK(two.free_count() == 5);
}

TEST_CASE("shape regularity of the split-square family is 2 + 2*sqrt(2)") {
  // right isoceles triangle: diameter sqrt(2)h, inradius h(2-sqrt(2))/2
  const double expected = 2.0 + 2.0 * std::sqrt(2.0);
  CHECK(shape_regularity(build_structured_mesh(4)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(shape_regularity(build_structured_mesh(16)) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("uniform refinement bookkeeping") {
  MeshHierarchy h = refine_uniform(build_structured_mesh(2), 1);
  CHECK(h.fine.vertex_count() == 25);
  CHECK(h.fine.element_count() == 32);
  CHECK(h.levels == 1);

  // each coarse element owns exactly four children
  std::vector<int> children(static_cast<std::size_t>(h.coarse.element_count()), 0);
  for (int c : h.fine_to_coarse_element) {
    REQUIRE(c >= 0);
    REQUIRE(c < h.coarse.element_count());
    ++children[static_cast<std::size_t>(c)];
  }
  for (int c : children) CHECK(c == 4);

  // coarse vertices reappear at the same coordinates
  for (int v = 0; v < h.coarse.vertex_count(); ++v) {
    const int fv = h.coarse_vertex_to_fine_vertex[static_cast<std::size_t>(v)];
    CHECK((h.coarse.vertices[static_cast<std::size_t>(v)] -
           h.fine.vertices[static_cast<std::size_t>(fv)])
              .norm() == doctest::Approx(0.0).epsilon(1e-15));
  }

  // levels = 0 keeps the mesh and uses identity maps
  MeshHierarchy flat = refine_uniform(build_structured_mesh(2), 0);
  CHECK(flat.fine.vertex_count() == flat.coarse.vertex_count());
  for (std::size_t i = 0; i < flat.fine_to_coarse_element.size(); ++i)
    CHECK(flat.fine_to_coarse_element[i] == static_cast<int>(i));
}

TEST_CASE("vertex patches: star elements and strictly interior fine dofs") {
  MeshHierarchy h = refine_uniform(build_structured_mesh(4), 1);

  int center = -1;
  for (int v = 0; v < h.coarse.vertex_count(); ++v) {
    if ((h.coarse.vertices[static_cast<std::size_t>(v)] - Eigen::Vector2d(0.5, 0.5)).norm() <
        1e-12)
      center = v;
  }
  REQUIRE(center >= 0);

  Patch p = vertex_patch(h, center);
  CHECK(p.center_vertex == center);
  CHECK(p.elements.size() == 6);  // interior vertex star on this family

  // Oracle: the open star is exactly where the center's hat function is
  // positive, so the patch dof set must match the support of that hat
  // restricted to free fine vertices.
  std::set<int> dofs(p.fine_interior_dofs.begin(), p.fine_interior_dofs.end());
  std::set<int> hat_support;
  for (int fv : h.fine.free_vertices) {
    const Eigen::Vector2d x = h.fine.vertices[static_cast<std::size_t>(fv)];
    // evaluate the center's P1 hat at x through barycentric coordinates
    double hat = 0.0;
    for (int e : p.elements) {
      const auto& tri = h.coarse.triangles[static_cast<std::size_t>(e)];
      Eigen::Matrix3d m;
      Eigen::Vector3d rhs(1.0, x.x(), x.y());
      for (int k = 0; k < 3; ++k) {
        const Eigen::Vector2d v = h.coarse.vertices[static_cast<std::size_t>(tri[k])];
        m(0, k) = 1.0;
        m(1, k) = v.x();
        m(2, k) = v.y();
      }
      const Eigen::Vector3d lambda = m.fullPivLu().solve(rhs);
      if (lambda.minCoeff() >= -1e-12) {
        for (int k = 0; k < 3; ++k)
          if (tri[k] == center) hat = std::max(hat, lambda[k]);
      }
    }
    if (hat > 1e-12) hat_support.insert(h.fine.free_index[static_cast<std::size_t>(fv)]);
  }
  CHECK(dofs == hat_support);

  CHECK_THROWS_AS(vertex_patch(h, 0), std::invalid_argument);  // corner is a boundary vertex
  Patch corner = vertex_patch_any(h, 0);
  CHECK(corner.center_vertex == 0);
  CHECK(corner.elements.size() >= 1);
}
