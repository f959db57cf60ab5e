#pragma once

#include "homog/mesh.hpp"

#include <Eigen/Sparse>

#include <array>
#include <string>
#include <vector>

namespace homog {

/// Raised when an iterative solve misses its tolerance budget.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric positive definite 2x2 coefficient per fine element, stored as
/// (a11, a12, a22). delta and big_m cache the extreme eigenvalues over all
/// elements, so the ellipticity window is available without a rescan.
struct CoefficientField {
  std::vector<std::array<double, 3>> entries;
  double delta = 0.0;
  double big_m = 0.0;
  std::string kind;

  static CoefficientField isotropic(const std::vector<double>& scalar, std::string kind);
  static CoefficientField identity(int element_count);

  /// Recomputes delta / big_m from the entries and checks uniform positivity.
  void refresh_bounds();
};

struct SparseOperator {
  Eigen::SparseMatrix<double> matrix;
  bool symmetric = false;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
};

/// Piecewise linear function on the fine mesh, identified by its values at
/// the free fine vertices (boundary values are zero).
struct FeFunction {
  Eigen::VectorXd values;
  const MeshHierarchy* hierarchy = nullptr;
};

/// Stiffness matrix on the free fine dofs for the bilinear form
/// (grad u, A grad v); exact per-element quadrature since A is constant on
/// each fine element.
SparseOperator assemble_stiffness(const MeshHierarchy& h, const CoefficientField& a);

/// Load vector for element-wise constant f: entry = sum over incident
/// elements of f_t |t| / 3.
Eigen::VectorXd assemble_load(const MeshHierarchy& h, const std::vector<double>& f);

/// Exact P1 mass matrix on the free fine dofs.
SparseOperator assemble_mass(const MeshHierarchy& h);

/// Mass matrix weighted by 1/diam(T)^2 of the *coarse* element containing
/// each fine element; used for mesh-scaled L2 quantities.
SparseOperator assemble_weighted_mass_inv_h(const MeshHierarchy& h);

double energy_norm(const SparseOperator& k, const Eigen::VectorXd& v);

/// Precomputed coefficient-independent norms on one hierarchy.
struct FineNorms {
  SparseOperator stiffness_identity;
  SparseOperator mass;
  SparseOperator weighted_mass;

  static FineNorms build(const MeshHierarchy& h);

  double h1_seminorm(const Eigen::VectorXd& v) const { return energy_norm(stiffness_identity, v); }
  double l2_norm(const Eigen::VectorXd& v) const { return energy_norm(mass, v); }
  double weighted_l2_inv_h(const Eigen::VectorXd& v) const { return energy_norm(weighted_mass, v); }
};

/// || diam(T) * f ||_L2 with the coarse element diameter as weight; exact for
/// element-wise constant f.
double scaled_load_norm(const MeshHierarchy& h, const std::vector<double>& f);

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients from a zero start. Stops at
/// relative residual `tol` (measured against ||b||) and throws SolverError
/// past 50 * dofs iterations. Fully deterministic.
FeFunction solve_reference(const MeshHierarchy& h, const SparseOperator& k,
                           const Eigen::VectorXd& b, double tol = 1e-10,
                           SolveStats* stats = nullptr);

}  // namespace homog
