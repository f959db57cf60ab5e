#include "homog/multiscale.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace homog {

std::string to_string(SpaceMode mode) {
  switch (mode) {
    case SpaceMode::exact:
      return "exact";
    case SpaceMode::layered:
      return "layered";
    case SpaceMode::collapsed:
      return "collapsed";
    case SpaceMode::damped:
      return "damped";
  }
  return "unknown";
}

namespace {

// Drops entries below 1e-14 of the column's energy norm. Storage-only
// compression; every operator application upstream ran at full precision.
void append_truncated_column(const Eigen::VectorXd& col, int col_index, const SparseOperator& k,
                             std::vector<Eigen::Triplet<double>>& triplets) {
  const double enorm = energy_norm(k, col);
  const double drop = 1e-14 * enorm;
  for (int i = 0; i < col.size(); ++i) {
    if (std::abs(col[i]) > drop) triplets.emplace_back(i, col_index, col[i]);
  }
}

}  // namespace

MultiscaleSpace build_space(const CorrectorEngine& engine, SpaceMode mode, int ell,
                            const SpectralEstimate* spec, double omega) {
  if (ell < 0) throw std::invalid_argument("build_space: ell must be nonnegative");
  if (mode == SpaceMode::collapsed && spec == nullptr)
    throw std::invalid_argument("build_space: the collapsed mode needs a spectral estimate");
  if (mode == SpaceMode::damped && omega <= 0.0 && spec == nullptr)
    throw std::invalid_argument(
        "build_space: damped mode needs either omega > 0 or a spectral estimate");

  const QuasiInterpolation& q = engine.interpolation();
  const SparseOperator& k = engine.stiffness();
  const int nf = static_cast<int>(q.prolong_matrix.rows());
  const int nc = static_cast<int>(q.prolong_matrix.cols());
  if (nc == 0) throw std::invalid_argument("build_space: no interior coarse vertices");

  MultiscaleSpace space;
  space.mode = mode;
  space.ell = (mode == SpaceMode::exact) ? 0 : ell;
  if (spec != nullptr) space.spectrum = *spec;

  const int per_vertex = (mode == SpaceMode::layered) ? ell + 1 : 1;
  space.column_vertex.resize(static_cast<std::size_t>(nc) * per_vertex);
  space.column_layer.resize(space.column_vertex.size(), 0);

  double relax = omega;
  if (mode == SpaceMode::damped && relax <= 0.0)
    relax = 2.0 / (spec->lambda_min + spec->lambda_max);

  std::vector<Eigen::Triplet<double>> triplets;
  for (int r = 0; r < nc; ++r) {
    const Eigen::VectorXd phi = q.prolong_matrix.col(r);
    const int base = r * per_vertex;
    switch (mode) {
      case SpaceMode::exact: {
        const Eigen::VectorXd col = phi - engine.exact_corrector(phi);
        append_truncated_column(col, base, k, triplets);
        space.column_vertex[base] = r;
        break;
      }
      case SpaceMode::layered: {
        const std::vector<Eigen::VectorXd> iter = engine.plain_corrector_iterates(phi, ell);
        for (int nu = 0; nu <= ell; ++nu) {
          append_truncated_column(phi - iter[static_cast<std::size_t>(nu)], base + nu, k, triplets);
          space.column_vertex[static_cast<std::size_t>(base + nu)] = r;
          space.column_layer[static_cast<std::size_t>(base + nu)] = nu;
        }
        break;
      }
      case SpaceMode::collapsed: {
        const Eigen::VectorXd col = phi - engine.chebyshev_corrector(phi, ell, *spec);
        append_truncated_column(col, base, k, triplets);
        space.column_vertex[base] = r;
        break;
      }
      case SpaceMode::damped: {
        const Eigen::VectorXd col = phi - engine.damped_corrector(phi, ell, relax);
        append_truncated_column(col, base, k, triplets);
        space.column_vertex[base] = r;
        break;
      }
    }
  }

  space.basis.resize(nf, nc * per_vertex);
  space.basis.setFromTriplets(triplets.begin(), triplets.end());
  space.basis.makeCompressed();

  std::ostringstream tag;
  tag << to_string(mode) << " ell=" << space.ell;
  if (mode == SpaceMode::collapsed || mode == SpaceMode::damped) {
    tag << " interval=[" << space.spectrum.lambda_min << "," << space.spectrum.lambda_max << "]";
    if (mode == SpaceMode::damped) tag << " omega=" << relax;
  }
  space.provenance = tag.str();
  return space;
}

GalerkinSolution galerkin_solve(const MultiscaleSpace& space, const SparseOperator& k,
                                const Eigen::VectorXd& b) {
  const int m = space.columns();
  if (m == 0) throw std::invalid_argument("galerkin_solve: empty basis");
  if (space.basis.rows() != k.rows() || b.size() != k.rows())
    throw std::invalid_argument("galerkin_solve: dimension mismatch");

  // Small dense system; layered bases turn rank-deficient as the iterates
  // converge, so factor through the eigendecomposition and drop directions
  // below 1e-12 of the top eigenvalue. This yields the minimum-norm
  // coefficient vector and is deterministic across runs.
  Eigen::MatrixXd g = Eigen::MatrixXd(space.basis.transpose() * (k.matrix * space.basis));
  g = 0.5 * (g + g.transpose()).eval();
  const Eigen::VectorXd rhs = space.basis.transpose() * b;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.info() != Eigen::Success)
    throw SolverError("galerkin_solve: eigendecomposition of the Gram matrix failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev[m - 1];
  if (!(top > 0.0)) throw SolverError("galerkin_solve: the Galerkin system has rank zero");
  const double cutoff = 1e-12 * top;

  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  int rank = 0;
  for (int i = 0; i < m; ++i) {
    if (ev[i] <= cutoff) continue;
    ++rank;
    const Eigen::VectorXd dir = es.eigenvectors().col(i);
    c += (dir.dot(rhs) / ev[i]) * dir;
  }
  if (rank == 0) throw SolverError("galerkin_solve: the Galerkin system has rank zero");

  GalerkinSolution sol;
  sol.coefficients = std::move(c);
  sol.w = space.basis * sol.coefficients;
  return sol;
}

ErrorReport evaluate_errors(const SparseOperator& k, const QuasiInterpolation& q,
                            const Eigen::VectorXd& u_ref, const Eigen::VectorXd& w_localized,
                            const Eigen::VectorXd& w_exact, const SpectralEstimate& spec, int ell,
                            double scaled_load) {
  ErrorReport rep;
  rep.energy_error = energy_norm(k, u_ref - w_localized);
  rep.ideal_error = energy_norm(k, u_ref - w_exact);
  rep.interp_error = energy_norm(k, u_ref - q.prolongate(q.apply_pi(u_ref)));

  const double beta = spec.chebyshev_bound(ell);
  rep.localization_bound = (1.0 + beta) * rep.ideal_error + beta * rep.interp_error;
  rep.bound_satisfied =
      rep.energy_error <= rep.localization_bound + 1e-10 * std::max(1.0, rep.localization_bound);
  if (scaled_load > 0.0) rep.load_ratio = rep.ideal_error / scaled_load;
  return rep;
}

double exact_identity_residual(const CorrectorEngine& engine, const Eigen::VectorXd& u_ref,
                               const Eigen::VectorXd& w_exact) {
  const Eigen::VectorXd correction = engine.exact_corrector(u_ref);
  const double num = energy_norm(engine.stiffness(), (u_ref - w_exact) - correction);
  const double den = energy_norm(engine.stiffness(), u_ref);
  return (den > 0.0) ? num / den : num;
}

}  // namespace homog
