#include "homog/quasi_interp.hpp"

#include "homog/fem.hpp"
#include "homog/mesh.hpp"
#include "homog/rng.hpp"

#include "doctest.h"

#include <cmath>

using namespace homog;

namespace {

Eigen::VectorXd random_fine(int size, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = rng.symmetric();
  return v;
}

}  // namespace

TEST_CASE("projection identities") {
  MeshHierarchy h = refine_uniform(build_structured_mesh(4), 2);
  QuasiInterpolation q = build_pi(h);
  const int nc = static_cast<int>(q.pi_matrix.rows());
  REQUIRE(nc == 9);

  // applying the operator to a prolongated coarse function recovers the
  // coarse coefficients exactly
  Eigen::MatrixXd prod = Eigen::MatrixXd(q.pi_matrix * q.prolong_matrix);
  CHECK((prod - Eigen::MatrixXd::Identity(nc, nc)).cwiseAbs().maxCoeff() <= 1e-12);

  // idempotency and the complementary kernel projection
  Eigen::VectorXd v = random_fine(static_cast<int>(q.pi_matrix.cols()), 11);
  Eigen::VectorXd pv = q.apply_pi(v);
  CHECK((q.apply_pi(q.prolongate(pv)) - pv).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::VectorXd kv = q.kernel_project(v);
  CHECK(q.apply_pi(kv).cwiseAbs().maxCoeff() <= 1e-12 * v.cwiseAbs().maxCoeff());
  CHECK((q.kernel_project(kv) - kv).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("hat functions form a partition of unity on the fine free dofs") {
  MeshHierarchy h = refine_uniform(build_structured_mesh(4), 1);
  QuasiInterpolation q = build_pi(h);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(q.hat_matrix.cols());
  Eigen::VectorXd sum = q.hat_matrix * ones;
  CHECK((sum - Eigen::VectorXd::Ones(sum.size())).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("element fits reproduce linear functions") {
  MeshHierarchy h = refine_uniform(build_structured_mesh(4), 2);

  // nodal values of an affine function at the fine free vertices
  Eigen::VectorXd lin(h.fine.free_count());
  for (int fv : h.fine.free_vertices) {
    const Eigen::Vector2d x = h.fine.vertices[static_cast<std::size_t>(fv)];
    lin[h.fine.free_index[static_cast<std::size_t>(fv)]] = 0.3 * x.x() - 0.7 * x.y() + 0.2;
  }
  for (int e = 0; e < h.coarse.element_count(); ++e) {
    const Eigen::Vector3d fit = element_l2_linear_fit(h, e, lin);
    const auto& tri = h.coarse.triangles[static_cast<std::size_t>(e)];
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d x = h.coarse.vertices[static_cast<std::size_t>(tri[k])];
      // boundary fine vertices carry value zero in the input, so only fully
      // interior elements reproduce the affine function exactly
      bool touches_boundary = false;
      for (int j = 0; j < 3; ++j)
        touches_boundary |= h.coarse.boundary_vertex[static_cast<std::size_t>(tri[j])];
      if (!touches_boundary)
        CHECK(std::abs(fit[k] - (0.3 * x.x() - 0.7 * x.y() + 0.2)) <= 1e-12);
    }
  }
}

TEST_CASE("hat-weighted splitting sums back and stays in the kernel") {
  MeshHierarchy h = refine_uniform(build_structured_mesh(4), 2);
  QuasiInterpolation q = build_pi(h);
  CoefficientField a = CoefficientField::identity(h.fine.element_count());
  SparseOperator k = assemble_stiffness(h, a);

  Eigen::VectorXd v = q.kernel_project(random_fine(h.fine.free_count(), 23));
  const auto pieces = stable_decomposition(q, v);
  REQUIRE(static_cast<int>(pieces.size()) == h.coarse.vertex_count());

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(v.size());
  for (const auto& p : pieces) {
    sum += p;
    CHECK(q.apply_pi(p).cwiseAbs().maxCoeff() <= 1e-10);
  }
  CHECK((sum - v).cwiseAbs().maxCoeff() <= 1e-10);

  const double ratio = decomposition_energy_ratio(pieces, v, k);
  CHECK(ratio > 0.0);
  CHECK(std::isfinite(ratio));

  // inputs that are not kernel functions are rejected
  Eigen::VectorXd coarse_part = q.prolongate(Eigen::VectorXd::Ones(q.pi_matrix.rows()));
  CHECK_THROWS_AS(stable_decomposition(q, v + coarse_part), std::invalid_argument);
}

TEST_CASE("stability constants sit at their frozen values") {
  MeshHierarchy h = refine_uniform(build_structured_mesh(4), 2);
  QuasiInterpolation q = build_pi(h);
  StabilityReport rep = estimate_stability_constants(h, q);
  // power iteration on the two generalized eigenproblems; values pinned from
  // a dense reference solve of the same problems
  CHECK(rep.c1 == doctest::Approx(1.1687).epsilon(1e-2));
  CHECK(rep.c2 == doctest::Approx(0.2135).epsilon(1e-2));
  CHECK(rep.c1 >= 1.0);
  CHECK(rep.converged);
  CHECK(rep.achieved_tol < 1e-2);
}
