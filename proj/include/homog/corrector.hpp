#pragma once

#include "homog/fem.hpp"
#include "homog/mesh.hpp"
#include "homog/quasi_interp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Sparse>

#include <cstdint>
#include <memory>
#include <vector>

namespace homog {

/// One local correction problem on a vertex patch. The embedding maps local
/// coefficients c to kernel functions via (extend by zero, then project onto
/// the kernel of the quasi-interpolation). For an interior center its Gram
/// matrix in the energy inner product is singular in exactly one direction,
/// the coefficients of the center hat, because that hat is the one coarse
/// function living entirely inside the patch and the kernel projection
/// annihilates it. Patches of boundary vertices contain no coarse function at
/// all, so their Gram matrices are definite and kernel_dir stays empty.
struct PatchProblem {
  Patch patch;
  Eigen::SparseMatrix<double> embed;  // fine free x local dofs
  Eigen::VectorXd kernel_dir;         // unit local coefficients of the center hat

  bool use_dense = true;
  Eigen::LLT<Eigen::MatrixXd> dense_factor;  // of the kernel-shifted Gram
  Eigen::SparseMatrix<double> gram;          // kept for the iterative path
  Eigen::VectorXd gram_inv_diag;

  int local_dim() const { return static_cast<int>(patch.fine_interior_dofs.size()); }
};

/// Extreme eigenvalues of the additive correction operator on the kernel
/// space, plus the contraction rates they induce. The interval is a safe
/// envelope of the computed Ritz values, so Chebyshev iterates built on it
/// stay inside their bound.
struct SpectralEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
  double q_cheb = 0.0;    // (sqrt(kappa)-1)/(sqrt(kappa)+1)
  double q_damped = 0.0;  // (kappa-1)/(kappa+1)

  SpectralEstimate() = default;
  SpectralEstimate(double lmin, double lmax);

  /// Worst-case energy-error factor of the Chebyshev corrector after `ell`
  /// steps: 2 q^ell / (1 + q^(2 ell)).
  double chebyshev_bound(int ell) const;
};

enum class CorrectionScheme { plain, damped, chebyshev };

/// Validated iteration request used by the multiscale layer and the CLI.
struct IterationConfig {
  CorrectionScheme scheme = CorrectionScheme::chebyshev;
  int ell = 0;
  double omega = 0.0;             // damped scheme only; 0 picks 2/(lmin+lmax)
  double lambda_max_bound = 0.0;  // when > 0, enforce omega < 2/bound
  double inner_tol = 1e-12;       // tolerance for the local patch solves

  void validate() const;
};

/// Additive subspace-correction engine: one a-orthogonal projection per
/// coarse vertex patch, summed in a fixed order. Patch solves run densely
/// below `dense_limit` unknowns and by conjugate gradients above it; both
/// paths return the same local projection.
///
/// The default patch family runs over every coarse vertex, boundary ones
/// included; the boundary patches are what makes the family span the whole
/// kernel space (the hat functions of all vertices form a partition of
/// unity). Two refinements of that rule: a mesh whose only interior vertex
/// stars the entire domain gets just that one patch (it spans by itself, and
/// the operator is then exactly the identity on the kernel), and patches
/// containing no fine interior dof contribute a trivial subspace and are
/// skipped. Custom studies can pass an explicit patch list instead.
class CorrectorEngine {
 public:
  struct Options {
    int dense_limit = 400;
    double cg_tol = 1e-12;
    int threads = 1;
    double saddle_tol = 1e-10;
  };

  CorrectorEngine(const MeshHierarchy& h, const QuasiInterpolation& q, const SparseOperator& k);
  CorrectorEngine(const MeshHierarchy& h, const QuasiInterpolation& q, const SparseOperator& k,
                  Options opts);
  /// Restricts the correction to an explicit patch list (e.g. a single patch).
  CorrectorEngine(const MeshHierarchy& h, const QuasiInterpolation& q, const SparseOperator& k,
                  std::vector<Patch> patches);
  CorrectorEngine(const MeshHierarchy& h, const QuasiInterpolation& q, const SparseOperator& k,
                  std::vector<Patch> patches, Options opts);

  int patch_count() const { return static_cast<int>(problems_.size()); }
  const PatchProblem& problem(int i) const { return problems_.at(i); }
  const SparseOperator& stiffness() const { return k_; }
  const QuasiInterpolation& interpolation() const { return q_; }
  const MeshHierarchy& hierarchy() const { return h_; }

  void set_threads(int threads) { opts_.threads = threads; }

  /// Energy projection of r onto one local subspace.
  Eigen::VectorXd apply_patch_projection(int i, const Eigen::VectorXd& r) const;

  /// Sum of all patch projections, accumulated in ascending patch order
  /// regardless of thread count.
  Eigen::VectorXd apply_schwarz(const Eigen::VectorXd& r) const;

  /// Stationary corrector iterates: x_0 = 0, x_{v+1} = x_v + S(u - x_v).
  /// Returns x_0 .. x_steps.
  std::vector<Eigen::VectorXd> plain_corrector_iterates(const Eigen::VectorXd& u, int steps) const;
  Eigen::VectorXd plain_corrector(const Eigen::VectorXd& u, int steps) const;

  /// Same recursion with relaxation omega. The iterates variant returns
  /// x_0 .. x_steps from one pass.
  Eigen::VectorXd damped_corrector(const Eigen::VectorXd& u, int steps, double omega) const;
  std::vector<Eigen::VectorXd> damped_corrector_iterates(const Eigen::VectorXd& u, int steps,
                                                         double omega) const;

  /// Chebyshev semi-iteration on the estimate's interval via the usual
  /// three-term recurrence; the step weights are never materialized. Each
  /// intermediate iterate is itself the optimal combination for its step
  /// count, so the iterates variant yields the whole localization sweep in
  /// one pass, bitwise equal to separate fixed-step calls.
  Eigen::VectorXd chebyshev_corrector(const Eigen::VectorXd& u, int steps,
                                      const SpectralEstimate& spec) const;
  std::vector<Eigen::VectorXd> chebyshev_corrector_iterates(const Eigen::VectorXd& u, int steps,
                                                            const SpectralEstimate& spec) const;

  /// Dispatches on cfg.scheme. The spectral estimate is required for the
  /// chebyshev scheme and for damped with omega = 0 (auto relaxation).
  Eigen::VectorXd corrector_by_config(const Eigen::VectorXd& u, const IterationConfig& cfg,
                                      const SpectralEstimate* spec = nullptr) const;

  /// Combination weights over the plain iterates that the Chebyshev recurrence
  /// realizes implicitly. Diagnostic only; they sum to one.
  static std::vector<double> chebyshev_weights(int steps, const SpectralEstimate& spec);

  /// Energy projection onto the full kernel space through the saddle-point
  /// system [K, Pi^T; Pi, 0]; the factorization is cached across calls.
  Eigen::VectorXd exact_corrector(const Eigen::VectorXd& u) const;

  /// Lanczos in the energy inner product on the kernel space, with full
  /// reorthogonalization. Degenerate (single point) spectra are reported
  /// unpadded so exact identities remain testable.
  SpectralEstimate estimate_spectrum(int lanczos_steps = 60, std::uint64_t seed = 1) const;

 private:
  void build_problems(std::vector<Patch> patches);
  Eigen::VectorXd project_with_ky(int i, const Eigen::VectorXd& ky) const;

  const MeshHierarchy& h_;
  const QuasiInterpolation& q_;
  const SparseOperator& k_;
  Options opts_;
  std::vector<PatchProblem> problems_;

  struct SaddleCache;
  mutable std::shared_ptr<SaddleCache> saddle_;
};

}  // namespace homog
