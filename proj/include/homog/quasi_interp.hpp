#pragma once

#include "homog/fem.hpp"
#include "homog/mesh.hpp"

#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace homog {

/// Projection from the fine space onto the coarse P1 space. Built from
/// element-wise L2 fits onto linear polynomials that are then averaged over
/// each vertex star with area weights; values at boundary coarse vertices are
/// dropped so the image satisfies the homogeneous Dirichlet condition.
///
/// pi_matrix * prolong_matrix is the identity on the coarse dofs, which makes
/// the operator a projection along its kernel, the "fine detail" space.
struct QuasiInterpolation {
  Eigen::SparseMatrix<double> pi_matrix;       // coarse free x fine free
  Eigen::SparseMatrix<double> prolong_matrix;  // fine free x coarse free
  // Hat values for *all* coarse vertices (columns), including boundary ones;
  // partition-of-unity sums need the boundary hats even though they carry no
  // coarse dof.
  Eigen::SparseMatrix<double> hat_matrix;  // fine free x coarse vertices
  const MeshHierarchy* hierarchy = nullptr;

  Eigen::VectorXd apply_pi(const Eigen::VectorXd& fine) const;
  Eigen::VectorXd prolongate(const Eigen::VectorXd& coarse) const;
  /// v minus the prolongated coarse interpolant: lands in the kernel of pi.
  Eigen::VectorXd kernel_project(const Eigen::VectorXd& fine) const;
};

QuasiInterpolation build_pi(const MeshHierarchy& h);

/// Best L2 fit of a fine function by a linear polynomial on one coarse
/// element, reported through its values at the element's three vertices.
Eigen::Vector3d element_l2_linear_fit(const MeshHierarchy& h, int coarse_elem,
                                      const Eigen::VectorXd& fine);

/// Fine function with nodal values hat_i(x) * v(x); the product localizes v
/// to the star of coarse vertex i. Valid for any coarse vertex, boundary
/// ones included.
Eigen::VectorXd nodal_interpolate_product(const QuasiInterpolation& q, int coarse_vertex,
                                          const Eigen::VectorXd& v);

/// Splits a kernel function v into localized kernel pieces, one per coarse
/// vertex, via the hat partition of unity. The pieces sum back to v exactly
/// (up to roundoff). Inputs with a coarse component beyond `kernel_tol` are
/// rejected.
std::vector<Eigen::VectorXd> stable_decomposition(const QuasiInterpolation& q,
                                                  const Eigen::VectorXd& v,
                                                  double kernel_tol = 1e-10);

/// Ratio sum_i ||v_i||_K^2 / ||v||_K^2 of a decomposition; the worst case
/// over samples estimates the splitting stability constant.
double decomposition_energy_ratio(const std::vector<Eigen::VectorXd>& pieces,
                                  const Eigen::VectorXd& v, const SparseOperator& k);

struct StabilityReport {
  double c1 = 0.0;  // H1 operator norm of the interpolation
  double c2 = 0.0;  // mesh-scaled L2 bound on the remainder v - pi(v)
  bool converged = false;
  double achieved_tol = 0.0;
  std::string mesh;
};

/// Power iteration on the generalized eigenproblems behind c1 and c2. The c2
/// problem has clustered top eigenvalues and needs a few hundred steps for
/// the default tolerance, hence the generous iteration budget.
StabilityReport estimate_stability_constants(const MeshHierarchy& h, const QuasiInterpolation& q,
                                             int max_iterations = 800, double tol = 1e-6);

}  // namespace homog
