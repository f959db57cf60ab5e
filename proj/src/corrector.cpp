#include "homog/corrector.hpp"

#include "homog/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace homog {

SpectralEstimate::SpectralEstimate(double lmin, double lmax) : lambda_min(lmin), lambda_max(lmax) {
  if (!(lmin > 0.0) || !(lmax >= lmin)) {
    std::ostringstream msg;
    msg << "invalid spectral interval [" << lmin << ", " << lmax << "]";
    throw std::invalid_argument(msg.str());
  }
  kappa = lambda_max / lambda_min;
  const double rt = std::sqrt(kappa);
  q_cheb = (rt - 1.0) / (rt + 1.0);
  q_damped = (kappa - 1.0) / (kappa + 1.0);
}

double SpectralEstimate::chebyshev_bound(int ell) const {
  if (ell < 0) throw std::invalid_argument("chebyshev_bound: negative step count");
  if (ell == 0) return 1.0;
  if (q_cheb == 0.0) return 0.0;  // single-point spectrum: exact after one step
  const double qp = std::pow(q_cheb, ell);
  return 2.0 * qp / (1.0 + qp * qp);
}

void IterationConfig::validate() const {
  if (ell < 0) throw std::invalid_argument("iteration count must be nonnegative");
  if (!(inner_tol > 0.0)) throw std::invalid_argument("inner solver tolerance must be positive");
  if (scheme == CorrectionScheme::damped && omega != 0.0) {
    if (!(omega > 0.0)) throw std::invalid_argument("damping parameter must be positive");
    if (lambda_max_bound > 0.0 && !(omega < 2.0 / lambda_max_bound)) {
      std::ostringstream msg;
      msg << "damping parameter " << omega << " is not below 2/" << lambda_max_bound
          << "; the recursion would not contract";
      throw std::invalid_argument(msg.str());
    }
  }
}

CorrectorEngine::CorrectorEngine(const MeshHierarchy& h, const QuasiInterpolation& q,
                                 const SparseOperator& k)
    : CorrectorEngine(h, q, k, Options{}) {}

CorrectorEngine::CorrectorEngine(const MeshHierarchy& h, const QuasiInterpolation& q,
                                 const SparseOperator& k, Options opts)
    : h_(h), q_(q), k_(k), opts_(opts) {
  std::vector<int> interior;
  for (int v = 0; v < h_.coarse.vertex_count(); ++v)
    if (!h_.coarse.boundary_vertex[static_cast<std::size_t>(v)]) interior.push_back(v);

  std::vector<Patch> patches;
  if (interior.size() == 1) {
    // A lone interior vertex whose star is the whole domain carries a local
    // space that already equals the full kernel space: the splitting is
    // complete with this one patch and the correction operator reduces to
    // the identity on it. Stars that miss elements (the two-cell grid split
    // along one diagonal) fall through to the full family below.
    Patch center = vertex_patch_any(h_, interior.front());
    if (static_cast<int>(center.elements.size()) == h_.coarse.element_count())
      patches.push_back(std::move(center));
  }
  if (patches.empty()) {
    for (int v = 0; v < h_.coarse.vertex_count(); ++v) patches.push_back(vertex_patch_any(h_, v));
  }
  build_problems(std::move(patches));
}

CorrectorEngine::CorrectorEngine(const MeshHierarchy& h, const QuasiInterpolation& q,
                                 const SparseOperator& k, std::vector<Patch> patches)
    : CorrectorEngine(h, q, k, std::move(patches), Options{}) {}

CorrectorEngine::CorrectorEngine(const MeshHierarchy& h, const QuasiInterpolation& q,
                                 const SparseOperator& k, std::vector<Patch> patches, Options opts)
    : h_(h), q_(q), k_(k), opts_(opts) {
  build_problems(std::move(patches));
}

void CorrectorEngine::build_problems(std::vector<Patch> patches) {
  if (patches.empty()) throw std::invalid_argument("corrector needs at least one patch");
  const int nf = h_.fine.free_count();
  problems_.reserve(patches.size());

  for (auto& patch : patches) {
    PatchProblem p;
    p.patch = std::move(patch);
    const int m = p.local_dim();
    // A patch without fine interior dofs carries the trivial subspace; it can
    // show up for low-valence boundary vertices at shallow refinement and is
    // simply dropped. (If every patch ends up empty the ctor throws below.)
    if (m == 0) continue;

    // Indicator columns for the local dofs, then one kernel projection of the
    // whole block: E = Z - prolong * (pi * Z).
    Eigen::SparseMatrix<double> z(nf, m);
    {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(m);
      for (int j = 0; j < m; ++j) trip.emplace_back(p.patch.fine_interior_dofs[j], j, 1.0);
      z.setFromTriplets(trip.begin(), trip.end());
    }
    Eigen::SparseMatrix<double> coarse_part = q_.pi_matrix * z;
    p.embed = z - Eigen::SparseMatrix<double>(q_.prolong_matrix * coarse_part);
    p.embed.prune(0.0);

    p.gram = Eigen::SparseMatrix<double>(p.embed.transpose()) * (k_.matrix * p.embed);
    const double trace = p.gram.diagonal().sum();
    if (trace <= 1e-12 * m) {
      std::ostringstream msg;
      msg << "local correction space at coarse vertex " << p.patch.center_vertex
          << " is degenerate (the kernel projection annihilates every local function); "
          << "the hierarchy needs at least one refinement level";
      throw std::invalid_argument(msg.str());
    }

    // Interior centers: the Gram matrix has a one-dimensional null space, the
    // local coefficients of the center hat, whose prolongation lives entirely
    // inside the patch. Boundary centers have no coarse function in their
    // patch, hence no null space.
    const int coarse_dof = h_.coarse.free_index[p.patch.center_vertex];
    if (coarse_dof >= 0) {
      Eigen::VectorXd klocal = Eigen::VectorXd::Zero(m);
      std::unordered_map<int, int> local_of;
      local_of.reserve(m);
      for (int j = 0; j < m; ++j) local_of.emplace(p.patch.fine_interior_dofs[j], j);
      for (Eigen::SparseMatrix<double>::InnerIterator it(q_.prolong_matrix, coarse_dof); it; ++it) {
        auto pos = local_of.find(static_cast<int>(it.row()));
        if (pos == local_of.end()) {
          if (std::abs(it.value()) > 1e-13)
            throw std::logic_error("center hat leaks outside its own patch");
          continue;
        }
        klocal[pos->second] = it.value();
      }
      const double knorm = klocal.norm();
      if (knorm <= 1e-14) throw std::logic_error("center hat has no dofs inside its patch");
      p.kernel_dir = klocal / knorm;

      const double resid = (p.gram * p.kernel_dir).norm();
      if (resid > 1e-8 * std::max(1.0, trace))
        throw std::logic_error("patch Gram kernel direction check failed");
    }

    p.use_dense = m <= opts_.dense_limit;
    if (p.use_dense) {
      // Shift the known null direction (if any) to make the Gram definite;
      // the shift component of any solution is annihilated by the embedding,
      // so the projected result is untouched.
      Eigen::MatrixXd g = Eigen::MatrixXd(p.gram);
      if (p.kernel_dir.size() > 0)
        g += (trace / m) * (p.kernel_dir * p.kernel_dir.transpose());
      p.dense_factor.compute(g);
      if (p.dense_factor.info() != Eigen::Success)
        throw SolverError("patch Gram factorization failed");
    } else {
      p.gram_inv_diag = p.gram.diagonal().cwiseMax(1e-300).cwiseInverse();
    }
    problems_.push_back(std::move(p));
  }

  if (problems_.empty())
    throw std::invalid_argument(
        "every patch is empty of fine interior dofs; the hierarchy needs at least one refinement "
        "level");
}

namespace {

// Jacobi-preconditioned CG for the singular but consistent patch systems.
// Zero start keeps iterates orthogonal to the null space up to roundoff.
Eigen::VectorXd patch_cg(const Eigen::SparseMatrix<double>& g, const Eigen::VectorXd& inv_diag,
                         const Eigen::VectorXd& kernel_dir, const Eigen::VectorXd& rhs,
                         double tol) {
  Eigen::VectorXd b = rhs;
  if (kernel_dir.size() > 0) b -= kernel_dir.dot(rhs) * kernel_dir;
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  if (bnorm == 0.0) return x;

  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const int max_it = 10 * static_cast<int>(b.size()) + 50;
  for (int it = 0; it < max_it; ++it) {
    if (r.norm() <= tol * bnorm) return x;
    Eigen::VectorXd gp = g * p;
    const double pgp = p.dot(gp);
    if (pgp <= 0.0) throw SolverError("patch CG breakdown: nonpositive curvature");
    const double alpha = rz / pgp;
    x += alpha * p;
    r -= alpha * gp;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw SolverError("patch CG did not converge within its iteration budget");
}

}  // namespace

Eigen::VectorXd CorrectorEngine::project_with_ky(int i, const Eigen::VectorXd& ky) const {
  const PatchProblem& p = problems_[i];
  Eigen::VectorXd rhs = p.embed.transpose() * ky;
  Eigen::VectorXd c;
  if (p.use_dense) {
    c = p.dense_factor.solve(rhs);
  } else {
    c = patch_cg(p.gram, p.gram_inv_diag, p.kernel_dir, rhs, opts_.cg_tol);
  }
  return p.embed * c;
}

Eigen::VectorXd CorrectorEngine::apply_patch_projection(int i, const Eigen::VectorXd& r) const {
  if (i < 0 || i >= patch_count()) throw std::out_of_range("patch index out of range");
  return project_with_ky(i, k_.matrix * r);
}

Eigen::VectorXd CorrectorEngine::apply_schwarz(const Eigen::VectorXd& r) const {
  if (r.size() != h_.fine.free_count())
    throw std::invalid_argument("apply_schwarz: vector size does not match the fine space");
  const Eigen::VectorXd ky = k_.matrix * r;
  const int n = patch_count();
  std::vector<Eigen::VectorXd> pieces(n);

  const int workers = std::max(1, std::min(opts_.threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) pieces[i] = project_with_ky(i, ky);
  } else {
    // Patch solves are independent; only the accumulation order matters for
    // reproducibility, and that stays sequential below.
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
            pieces[i] = project_with_ky(i, ky);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(r.size());
  for (int i = 0; i < n; ++i) out += pieces[i];
  return out;
}

std::vector<Eigen::VectorXd> CorrectorEngine::plain_corrector_iterates(const Eigen::VectorXd& u,
                                                                       int steps) const {
  if (steps < 0) throw std::invalid_argument("iteration count must be nonnegative");
  std::vector<Eigen::VectorXd> iterates;
  iterates.reserve(steps + 1);
  iterates.push_back(Eigen::VectorXd::Zero(u.size()));
  for (int v = 0; v < steps; ++v)
    iterates.push_back(iterates.back() + apply_schwarz(u - iterates.back()));
  return iterates;
}

Eigen::VectorXd CorrectorEngine::plain_corrector(const Eigen::VectorXd& u, int steps) const {
  if (steps < 0) throw std::invalid_argument("iteration count must be nonnegative");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(u.size());
  for (int v = 0; v < steps; ++v) x += apply_schwarz(u - x);
  return x;
}

Eigen::VectorXd CorrectorEngine::damped_corrector(const Eigen::VectorXd& u, int steps,
                                                  double omega) const {
  return damped_corrector_iterates(u, steps, omega).back();
}

std::vector<Eigen::VectorXd> CorrectorEngine::damped_corrector_iterates(const Eigen::VectorXd& u,
                                                                        int steps,
                                                                        double omega) const {
  if (steps < 0) throw std::invalid_argument("iteration count must be nonnegative");
  if (!(omega > 0.0)) throw std::invalid_argument("damping parameter must be positive");
  std::vector<Eigen::VectorXd> iterates;
  iterates.reserve(steps + 1);
  iterates.push_back(Eigen::VectorXd::Zero(u.size()));
  for (int v = 0; v < steps; ++v)
    iterates.push_back(iterates.back() + omega * apply_schwarz(u - iterates.back()));
  return iterates;
}

Eigen::VectorXd CorrectorEngine::chebyshev_corrector(const Eigen::VectorXd& u, int steps,
                                                     const SpectralEstimate& spec) const {
  return chebyshev_corrector_iterates(u, steps, spec).back();
}

std::vector<Eigen::VectorXd> CorrectorEngine::chebyshev_corrector_iterates(
    const Eigen::VectorXd& u, int steps, const SpectralEstimate& spec) const {
  if (steps < 0) throw std::invalid_argument("iteration count must be nonnegative");
  if (!(spec.lambda_min > 0.0)) throw std::invalid_argument("invalid spectrum: lambda_min <= 0");
  std::vector<Eigen::VectorXd> iterates;
  iterates.reserve(steps + 1);
  iterates.push_back(Eigen::VectorXd::Zero(u.size()));
  if (steps == 0) return iterates;

  const double theta = 0.5 * (spec.lambda_max + spec.lambda_min);
  const double delta = 0.5 * (spec.lambda_max - spec.lambda_min);
  if (delta <= 1e-14 * theta) {
    // Single-point spectrum: one scaled step is already exact.
    const Eigen::VectorXd x = (1.0 / theta) * apply_schwarz(u);
    for (int k = 0; k < steps; ++k) iterates.push_back(x);
    return iterates;
  }

  // Semi-iteration for S x = S u whose residual polynomial after k steps is
  // the Chebyshev polynomial of degree k scaled to equal 1 at the origin.
  // Every intermediate x_k is optimal for its own step count, so recording
  // them costs nothing beyond the copies.
  const double sigma = theta / delta;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(u.size());
  Eigen::VectorXd r = apply_schwarz(u);
  Eigen::VectorXd d = r / theta;
  double rho_prev = 1.0 / sigma;
  x += d;
  r -= apply_schwarz(d);
  iterates.push_back(x);
  for (int k = 1; k < steps; ++k) {
    const double rho = 1.0 / (2.0 * sigma - rho_prev);
    d = (rho * rho_prev) * d + (2.0 * rho / delta) * r;
    x += d;
    r -= apply_schwarz(d);
    rho_prev = rho;
    iterates.push_back(x);
  }
  return iterates;
}

Eigen::VectorXd CorrectorEngine::corrector_by_config(const Eigen::VectorXd& u,
                                                     const IterationConfig& cfg,
                                                     const SpectralEstimate* spec) const {
  cfg.validate();
  switch (cfg.scheme) {
    case CorrectionScheme::plain:
      return plain_corrector(u, cfg.ell);
    case CorrectionScheme::damped: {
      double omega = cfg.omega;
      if (omega == 0.0) {
        if (spec == nullptr)
          throw std::invalid_argument("damped scheme with automatic relaxation needs a spectrum");
        omega = 2.0 / (spec->lambda_min + spec->lambda_max);
      }
      if (cfg.ell == 0) return Eigen::VectorXd::Zero(u.size());
      return damped_corrector(u, cfg.ell, omega);
    }
    case CorrectionScheme::chebyshev:
      if (spec == nullptr)
        throw std::invalid_argument("chebyshev scheme needs a spectral estimate");
      return chebyshev_corrector(u, cfg.ell, *spec);
  }
  throw std::logic_error("unknown correction scheme");
}

std::vector<double> CorrectorEngine::chebyshev_weights(int steps, const SpectralEstimate& spec) {
  if (steps < 0) throw std::invalid_argument("iteration count must be nonnegative");
  std::vector<double> alpha(steps + 1, 0.0);
  if (steps == 0) {
    alpha[0] = 1.0;
    return alpha;
  }
  const double theta = 0.5 * (spec.lambda_max + spec.lambda_min);
  const double delta = 0.5 * (spec.lambda_max - spec.lambda_min);
  if (delta <= 1e-14 * theta) {
    // Residual polynomial 1 - t/theta, re-expanded in powers of (1 - t).
    alpha[0] = 1.0 - 1.0 / theta;
    alpha[1] = 1.0 / theta;
    return alpha;
  }

  // Chebyshev polynomials of (theta - t)/delta as coefficient vectors in t.
  auto affine_times = [&](const std::vector<double>& poly) {
    std::vector<double> out(poly.size() + 1, 0.0);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      out[j] += (theta / delta) * poly[j];
      out[j + 1] += (-1.0 / delta) * poly[j];
    }
    return out;
  };
  std::vector<double> prev{1.0};
  std::vector<double> curr = affine_times(prev);
  for (int k = 2; k <= steps; ++k) {
    std::vector<double> next = affine_times(curr);
    for (auto& c : next) c *= 2.0;
    for (std::size_t j = 0; j < prev.size(); ++j) next[j] -= prev[j];
    prev = std::move(curr);
    curr = std::move(next);
  }
  const double scale = curr[0];  // value at t = 0, i.e. the Chebyshev normalization
  for (auto& c : curr) c /= scale;

  // Re-expand p(t) = sum_j p_j t^j in the basis (1 - t)^nu using binomials:
  // t^j = sum_nu C(j, nu) (-1)^nu (1-t)^nu ... shifted via s = 1 - t.
  std::vector<std::vector<double>> binom(steps + 1, std::vector<double>(steps + 1, 0.0));
  for (int j = 0; j <= steps; ++j) {
    binom[j][0] = 1.0;
    for (int m = 1; m <= j; ++m)
      binom[j][m] = binom[j - 1][m - 1] + (m <= j - 1 ? binom[j - 1][m] : 0.0);
  }
  for (int m = 0; m <= steps; ++m) {
    double s = 0.0;
    for (int j = m; j <= steps; ++j) s += curr[j] * binom[j][m] * ((m % 2 == 0) ? 1.0 : -1.0);
    alpha[m] = s;
  }
  return alpha;
}

struct CorrectorEngine::SaddleCache {
  Eigen::SparseMatrix<double> system;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  int nf = 0;
  int nc = 0;
};

Eigen::VectorXd CorrectorEngine::exact_corrector(const Eigen::VectorXd& u) const {
  const int nf = h_.fine.free_count();
  if (u.size() != nf)
    throw std::invalid_argument("exact_corrector: vector size does not match the fine space");

  if (!saddle_) {
    auto cache = std::make_shared<SaddleCache>();
    cache->nf = nf;
    cache->nc = static_cast<int>(q_.pi_matrix.rows());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(k_.matrix.nonZeros() + 2 * q_.pi_matrix.nonZeros());
    for (int c = 0; c < k_.matrix.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(k_.matrix, c); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), c, it.value());
    for (int c = 0; c < q_.pi_matrix.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(q_.pi_matrix, c); it; ++it) {
        const int r = static_cast<int>(it.row());
        trip.emplace_back(nf + r, c, it.value());
        trip.emplace_back(c, nf + r, it.value());
      }
    cache->system.resize(nf + cache->nc, nf + cache->nc);
    cache->system.setFromTriplets(trip.begin(), trip.end());
    cache->lu.compute(cache->system);
    if (cache->lu.info() != Eigen::Success)
      throw SolverError("saddle-point factorization for the exact corrector failed");
    saddle_ = std::move(cache);
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(saddle_->nf + saddle_->nc);
  rhs.head(nf) = k_.matrix * u;
  Eigen::VectorXd sol = saddle_->lu.solve(rhs);
  const double rel = (saddle_->system * sol - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (rel > opts_.saddle_tol) {
    std::ostringstream msg;
    msg << "exact corrector solve reached relative residual " << rel << " (tolerance "
        << opts_.saddle_tol << ")";
    throw SolverError(msg.str());
  }
  return sol.head(nf);
}

SpectralEstimate CorrectorEngine::estimate_spectrum(int lanczos_steps, std::uint64_t seed) const {
  const int nf = h_.fine.free_count();
  const int kernel_dim = nf - static_cast<int>(q_.pi_matrix.rows());
  if (kernel_dim <= 0) throw SolverError("kernel space is empty; nothing to estimate");
  const int max_steps = std::min(lanczos_steps, kernel_dim);
  if (max_steps < 1) throw std::invalid_argument("spectrum estimation needs at least one step");

  SplitMix64 rng(0x6c616e637a6f73ULL ^ seed);
  Eigen::VectorXd start(nf);
  for (int i = 0; i < nf; ++i) start[i] = rng.symmetric();
  start = q_.kernel_project(start);

  auto k_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& kb) { return a.dot(kb); };

  std::vector<Eigen::VectorXd> basis, k_basis;
  basis.reserve(max_steps);
  k_basis.reserve(max_steps);

  Eigen::VectorXd ks = k_.matrix * start;
  const double snorm = std::sqrt(k_dot(start, ks));
  if (!(snorm > 1e-14)) throw SolverError("spectrum start vector vanished after projection");
  basis.push_back(start / snorm);
  k_basis.push_back(ks / snorm);

  std::vector<double> alpha, beta;
  for (int j = 0; j < max_steps; ++j) {
    Eigen::VectorXd w = apply_schwarz(basis[j]);
    const double a = k_dot(w, k_basis[j]);
    alpha.push_back(a);
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    // Two rounds of full reorthogonalization keep the Krylov basis clean even
    // after the extreme Ritz values have converged; the renewed kernel
    // projection stops roundoff noise from leaking into directions outside
    // the kernel space, where the operator vanishes and would fake zero
    // Ritz values once the Krylov space is exhausted.
    for (int round = 0; round < 2; ++round) {
      w = q_.kernel_project(w);
      Eigen::VectorXd kw = k_.matrix * w;
      for (std::size_t i = 0; i < basis.size(); ++i) w -= k_dot(basis[i], kw) * basis[i];
    }
    Eigen::VectorXd kw = k_.matrix * w;
    const double b = std::sqrt(std::max(0.0, k_dot(w, kw)));
    if (j + 1 == max_steps || b <= 1e-9 * std::max(1.0, std::abs(alpha[0]))) break;
    beta.push_back(b);
    basis.push_back(w / b);
    k_basis.push_back(kw / b);
  }

  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    tri(i, i) = alpha[i];
    if (i + 1 < m) {
      tri(i, i + 1) = beta[i];
      tri(i + 1, i) = beta[i];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
  if (es.info() != Eigen::Success) throw SolverError("tridiagonal eigensolver failed");
  const double ritz_min = es.eigenvalues().minCoeff();
  const double ritz_max = es.eigenvalues().maxCoeff();

  if (!(ritz_max > 0.0)) throw SolverError("correction operator appears to vanish");
  if (ritz_min <= 1e-12 * ritz_max) {
    std::ostringstream msg;
    msg << "correction operator is singular on the kernel space (Ritz interval [" << ritz_min
        << ", " << ritz_max << "]); the patch family does not span the kernel";
    throw SolverError(msg.str());
  }

  if (ritz_max - ritz_min <= 1e-8 * ritz_max) {
    const double mid = 0.5 * (ritz_min + ritz_max);
    return SpectralEstimate(mid, mid);
  }
  // Lanczos approaches lambda_min from above, so pad the lower end by more
  // than the upper; the padded interval is what the Chebyshev bound is
  // certified against.
  return SpectralEstimate(ritz_min * (1.0 - 1e-3), ritz_max * (1.0 + 1e-9));
}

}  // namespace homog
