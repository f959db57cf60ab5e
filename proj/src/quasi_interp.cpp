#include "homog/quasi_interp.hpp"

#include "homog/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace homog {

namespace {

// Fitted linear polynomial on one coarse element, expressed as three rows
// that map local fine free-dof values to the polynomial's values at the
// element's vertices. Monomials are centered and scaled per element so the
// 3x3 Gram stays well conditioned; all integrals use edge-midpoint
// quadrature, which is exact here because every integrand is quadratic.
struct ElementFit {
  std::vector<int> dofs;        // fine free dofs with support on the element
  Eigen::MatrixXd vertex_rows;  // 3 x dofs.size()
};

ElementFit build_element_fit(const MeshHierarchy& h, int coarse_elem,
                             const std::vector<std::vector<int>>& coarse_to_fine_elems) {
  const Triangulation& coarse = h.coarse;
  const Triangulation& fine = h.fine;
  const auto& ct = coarse.triangles[coarse_elem];

  const Eigen::Vector2d center =
      (coarse.vertices[ct[0]] + coarse.vertices[ct[1]] + coarse.vertices[ct[2]]) / 3.0;
  const double scale = coarse.element_diameters[coarse_elem];
  auto monomials = [&](const Eigen::Vector2d& x) {
    return Eigen::Vector3d(1.0, (x.x() - center.x()) / scale, (x.y() - center.y()) / scale);
  };

  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  {
    const double w = coarse.signed_area(coarse_elem) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d mid =
          0.5 * (coarse.vertices[ct[k]] + coarse.vertices[ct[(k + 1) % 3]]);
      const Eigen::Vector3d m = monomials(mid);
      gram += w * m * m.transpose();
    }
  }

  // moments of each fine hat against the monomials, restricted to free dofs
  std::vector<int> dof_of_vertex(fine.vertex_count(), -1);
  ElementFit fit;
  auto local_dof = [&](int fine_vertex) {
    int& slot = dof_of_vertex[fine_vertex];
    if (slot < 0) {
      slot = static_cast<int>(fit.dofs.size());
      fit.dofs.push_back(fine.free_index[fine_vertex]);
    }
    return slot;
  };

  std::vector<Eigen::Vector3d> moments;
  for (int fe : coarse_to_fine_elems[coarse_elem]) {
    const auto& t = fine.triangles[fe];
    const double w = fine.signed_area(fe) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d mid = 0.5 * (fine.vertices[t[k]] + fine.vertices[t[(k + 1) % 3]]);
      const Eigen::Vector3d m = w * monomials(mid);
      // the hat of each edge endpoint is 1/2 at the midpoint
      for (int endpoint : {t[k], t[(k + 1) % 3]}) {
        if (fine.free_index[endpoint] < 0) continue;
        const int ld = local_dof(endpoint);
        if (ld == static_cast<int>(moments.size())) moments.emplace_back(Eigen::Vector3d::Zero());
        moments[ld] += 0.5 * m;
      }
    }
  }

  Eigen::MatrixXd rhs(3, fit.dofs.size());
  for (std::size_t j = 0; j < moments.size(); ++j) rhs.col(j) = moments[j];
  const Eigen::MatrixXd coeff = gram.ldlt().solve(rhs);

  fit.vertex_rows.resize(3, fit.dofs.size());
  for (int a = 0; a < 3; ++a)
    fit.vertex_rows.row(a) = monomials(coarse.vertices[ct[a]]).transpose() * coeff;
  return fit;
}

std::vector<std::vector<int>> group_fine_elements(const MeshHierarchy& h) {
  std::vector<std::vector<int>> groups(h.coarse.element_count());
  for (int fe = 0; fe < h.fine.element_count(); ++fe)
    groups[h.fine_to_coarse_element[fe]].push_back(fe);
  return groups;
}

}  // namespace

QuasiInterpolation build_pi(const MeshHierarchy& h) {
  const Triangulation& coarse = h.coarse;
  const Triangulation& fine = h.fine;
  QuasiInterpolation q;
  q.hierarchy = &h;

  // hat values: locate each fine vertex in a parent coarse element and read
  // off the barycentric coordinates
  std::vector<Eigen::Triplet<double>> hat_trip;
  for (int fv = 0; fv < fine.vertex_count(); ++fv) {
    if (fine.free_index[fv] < 0) continue;
    const int fe = fine.vertex_to_elements[fv].front();
    const int ce = h.fine_to_coarse_element[fe];
    const auto& ct = coarse.triangles[ce];
    const Eigen::Vector2d p0 = coarse.vertices[ct[0]];
    Eigen::Matrix2d edges;
    edges.col(0) = coarse.vertices[ct[1]] - p0;
    edges.col(1) = coarse.vertices[ct[2]] - p0;
    const Eigen::Vector2d lam12 = edges.colPivHouseholderQr().solve(fine.vertices[fv] - p0);
    const Eigen::Vector3d lambda(1.0 - lam12.sum(), lam12[0], lam12[1]);
    for (int k = 0; k < 3; ++k) {
      if (lambda[k] > 1e-13)  // exact zeros off the closed star, modulo roundoff
        hat_trip.emplace_back(fine.free_index[fv], ct[k], lambda[k]);
    }
  }
  q.hat_matrix.resize(fine.free_count(), coarse.vertex_count());
  q.hat_matrix.setFromTriplets(hat_trip.begin(), hat_trip.end());

  std::vector<Eigen::Triplet<double>> pr_trip;
  for (int k = 0; k < q.hat_matrix.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(q.hat_matrix, k); it; ++it) {
      const int cfree = coarse.free_index[it.col()];
      if (cfree >= 0) pr_trip.emplace_back(it.row(), cfree, it.value());
    }
  }
  q.prolong_matrix.resize(fine.free_count(), coarse.free_count());
  q.prolong_matrix.setFromTriplets(pr_trip.begin(), pr_trip.end());

  // star areas for the weighted vertex averages
  std::vector<double> star_area(coarse.vertex_count(), 0.0);
  for (int ce = 0; ce < coarse.element_count(); ++ce)
    for (int v : coarse.triangles[ce]) star_area[v] += coarse.signed_area(ce);

  const auto groups = group_fine_elements(h);
  std::vector<Eigen::Triplet<double>> pi_trip;
  for (int ce = 0; ce < coarse.element_count(); ++ce) {
    const ElementFit fit = build_element_fit(h, ce, groups);
    const double area = coarse.signed_area(ce);
    const auto& ct = coarse.triangles[ce];
    for (int a = 0; a < 3; ++a) {
      const int cfree = coarse.free_index[ct[a]];
      if (cfree < 0) continue;  // boundary vertices take the value zero
      const double weight = area / star_area[ct[a]];
      for (std::size_t j = 0; j < fit.dofs.size(); ++j)
        pi_trip.emplace_back(cfree, fit.dofs[j], weight * fit.vertex_rows(a, j));
    }
  }
  q.pi_matrix.resize(coarse.free_count(), fine.free_count());
  q.pi_matrix.setFromTriplets(pi_trip.begin(), pi_trip.end());
  q.pi_matrix.prune(0.0);
  return q;
}

Eigen::VectorXd QuasiInterpolation::apply_pi(const Eigen::VectorXd& fine) const {
  return pi_matrix * fine;
}

Eigen::VectorXd QuasiInterpolation::prolongate(const Eigen::VectorXd& coarse) const {
  return prolong_matrix * coarse;
}

Eigen::VectorXd QuasiInterpolation::kernel_project(const Eigen::VectorXd& fine) const {
  return fine - prolong_matrix * (pi_matrix * fine);
}

Eigen::Vector3d element_l2_linear_fit(const MeshHierarchy& h, int coarse_elem,
                                      const Eigen::VectorXd& fine) {
  if (coarse_elem < 0 || coarse_elem >= h.coarse.element_count())
    throw std::invalid_argument("element_l2_linear_fit: element out of range");
  const ElementFit fit = build_element_fit(h, coarse_elem, group_fine_elements(h));
  Eigen::VectorXd local(fit.dofs.size());
  for (std::size_t j = 0; j < fit.dofs.size(); ++j) local[j] = fine[fit.dofs[j]];
  return fit.vertex_rows * local;
}

Eigen::VectorXd nodal_interpolate_product(const QuasiInterpolation& q, int coarse_vertex,
                                          const Eigen::VectorXd& v) {
  if (coarse_vertex < 0 || coarse_vertex >= static_cast<int>(q.hat_matrix.cols()))
    throw std::invalid_argument("nodal_interpolate_product: vertex out of range");
  if (v.size() != q.hat_matrix.rows())
    throw std::invalid_argument("nodal_interpolate_product: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (Eigen::SparseMatrix<double>::InnerIterator it(q.hat_matrix, coarse_vertex); it; ++it)
    out[it.row()] = it.value() * v[it.row()];
  return out;
}

std::vector<Eigen::VectorXd> stable_decomposition(const QuasiInterpolation& q,
                                                  const Eigen::VectorXd& v, double kernel_tol) {
  const double vnorm = v.norm();
  if (q.apply_pi(v).norm() > kernel_tol * std::max(1.0, vnorm))
    throw std::invalid_argument("stable_decomposition: input has a nonzero coarse component");

  // one piece per coarse vertex; the boundary hats are needed to complete
  // the partition of unity near the domain boundary
  std::vector<Eigen::VectorXd> pieces;
  const int n_vertices = static_cast<int>(q.hat_matrix.cols());
  pieces.reserve(n_vertices);
  for (int i = 0; i < n_vertices; ++i)
    pieces.push_back(q.kernel_project(nodal_interpolate_product(q, i, v)));
  return pieces;
}

double decomposition_energy_ratio(const std::vector<Eigen::VectorXd>& pieces,
                                  const Eigen::VectorXd& v, const SparseOperator& k) {
  const double denom = v.dot(k.matrix * v);
  if (denom <= 0.0) throw std::invalid_argument("decomposition_energy_ratio: zero input");
  double num = 0.0;
  for (const auto& p : pieces) num += p.dot(k.matrix * p);
  return num / denom;
}

namespace {

// Largest eigenvalue of K^{-1} B with B symmetric positive semidefinite,
// by power iteration in the K inner product.
struct PowerResult {
  double lambda = 0.0;
  bool converged = false;
  double achieved = 0.0;
};

template <typename ApplyB>
PowerResult power_iteration(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& k_solver,
                            const Eigen::SparseMatrix<double>& k, ApplyB&& apply_b, int n,
                            int max_iterations, double tol) {
  SplitMix64 rng(0x706f776572ULL);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.symmetric();
  x /= std::sqrt(x.dot(k * x));

  PowerResult res;
  double lambda_prev = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd bx = apply_b(x);
    const double lambda = x.dot(bx);
    res.lambda = lambda;
    res.achieved = std::abs(lambda - lambda_prev) / std::max(lambda, 1e-300);
    if (it > 0 && res.achieved <= tol) {
      res.converged = true;
      return res;
    }
    lambda_prev = lambda;
    Eigen::VectorXd y = k_solver.solve(bx);
    const double ynorm = std::sqrt(y.dot(k * y));
    if (ynorm == 0.0) break;  // B x vanished: iterate landed in the kernel of B
    x = y / ynorm;
  }
  return res;
}

}  // namespace

StabilityReport estimate_stability_constants(const MeshHierarchy& h, const QuasiInterpolation& q,
                                             int max_iterations, double tol) {
  const SparseOperator k_ident =
      assemble_stiffness(h, CoefficientField::identity(h.fine.element_count()));
  const SparseOperator w = assemble_weighted_mass_inv_h(h);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(k_ident.matrix);
  if (solver.info() != Eigen::Success)
    throw SolverError("estimate_stability_constants: factorization failed");

  const int n = k_ident.rows();
  const auto apply_c1 = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd px = q.prolong_matrix * (q.pi_matrix * x);
    const Eigen::VectorXd kpx = k_ident.matrix * px;
    return q.pi_matrix.transpose() * (q.prolong_matrix.transpose() * kpx);
  };
  const auto apply_c2 = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd rx = x - q.prolong_matrix * (q.pi_matrix * x);
    const Eigen::VectorXd wrx = w.matrix * rx;
    return wrx - q.pi_matrix.transpose() * (q.prolong_matrix.transpose() * wrx);
  };

  const PowerResult r1 = power_iteration(solver, k_ident.matrix, apply_c1, n, max_iterations, tol);
  const PowerResult r2 = power_iteration(solver, k_ident.matrix, apply_c2, n, max_iterations, tol);

  StabilityReport rep;
  rep.c1 = std::sqrt(std::max(0.0, r1.lambda));
  rep.c2 = std::sqrt(std::max(0.0, r2.lambda));
  rep.converged = r1.converged && r2.converged;
  rep.achieved_tol = std::max(r1.achieved, r2.achieved);
  rep.mesh = "coarse_elements=" + std::to_string(h.coarse.element_count()) +
             " fine_elements=" + std::to_string(h.fine.element_count());
  return rep;
}

}  // namespace homog
