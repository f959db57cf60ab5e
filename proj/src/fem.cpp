#include "homog/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace homog {

CoefficientField CoefficientField::isotropic(const std::vector<double>& scalar, std::string kind) {
  CoefficientField a;
  a.kind = std::move(kind);
  a.entries.reserve(scalar.size());
  for (double s : scalar) a.entries.push_back({s, 0.0, s});
  a.refresh_bounds();
  return a;
}

CoefficientField CoefficientField::identity(int element_count) {
  return isotropic(std::vector<double>(element_count, 1.0), "identity");
}

void CoefficientField::refresh_bounds() {
  if (entries.empty()) throw std::invalid_argument("coefficient field with no elements");
  delta = std::numeric_limits<double>::max();
  big_m = 0.0;
  for (const auto& e : entries) {
    const double tr = e[0] + e[2];
    const double det = e[0] * e[2] - e[1] * e[1];
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    const double lo = 0.5 * tr - disc;
    const double hi = 0.5 * tr + disc;
    delta = std::min(delta, lo);
    big_m = std::max(big_m, hi);
  }
  if (delta <= 0.0) throw std::invalid_argument("coefficient field is not uniformly positive");
}

namespace {

// Gradients of the three barycentric basis functions; constant per element.
std::array<Eigen::Vector2d, 3> barycentric_gradients(const Triangulation& tri, int elem) {
  const auto& t = tri.triangles[elem];
  const double area2 = 2.0 * tri.signed_area(elem);
  std::array<Eigen::Vector2d, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector2d e = tri.vertices[t[(k + 2) % 3]] - tri.vertices[t[(k + 1) % 3]];
    g[k] = Eigen::Vector2d(-e.y(), e.x()) / area2;
  }
  return g;
}

}  // namespace

SparseOperator assemble_stiffness(const MeshHierarchy& h, const CoefficientField& a) {
  const Triangulation& fine = h.fine;
  if (static_cast<int>(a.entries.size()) != fine.element_count())
    throw std::invalid_argument("assemble_stiffness: coefficient size does not match fine mesh");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * fine.element_count());
  for (int e = 0; e < fine.element_count(); ++e) {
    const auto g = barycentric_gradients(fine, e);
    const auto& c = a.entries[e];
    Eigen::Matrix2d mat;
    mat << c[0], c[1], c[1], c[2];
    const double area = fine.signed_area(e);
    const auto& t = fine.triangles[e];
    for (int i = 0; i < 3; ++i) {
      const int fi = fine.free_index[t[i]];
      if (fi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int fj = fine.free_index[t[j]];
        if (fj < 0) continue;
        trip.emplace_back(fi, fj, area * g[i].dot(mat * g[j]));
      }
    }
  }
  SparseOperator k;
  k.matrix.resize(fine.free_count(), fine.free_count());
  k.matrix.setFromTriplets(trip.begin(), trip.end());
  k.symmetric = true;
  return k;
}

Eigen::VectorXd assemble_load(const MeshHierarchy& h, const std::vector<double>& f) {
  const Triangulation& fine = h.fine;
  if (static_cast<int>(f.size()) != fine.element_count())
    throw std::invalid_argument("assemble_load: rhs size does not match fine mesh");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(fine.free_count());
  for (int e = 0; e < fine.element_count(); ++e) {
    const double w = f[e] * fine.signed_area(e) / 3.0;
    for (int v : fine.triangles[e]) {
      const int fi = fine.free_index[v];
      if (fi >= 0) b[fi] += w;
    }
  }
  return b;
}

namespace {

SparseOperator assemble_scaled_mass(const MeshHierarchy& h, bool inv_coarse_diameter_sq) {
  const Triangulation& fine = h.fine;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * fine.element_count());
  for (int e = 0; e < fine.element_count(); ++e) {
    double scale = 1.0;
    if (inv_coarse_diameter_sq) {
      const double d = h.coarse.element_diameters[h.fine_to_coarse_element[e]];
      scale = 1.0 / (d * d);
    }
    const double area = fine.signed_area(e);
    const auto& t = fine.triangles[e];
    for (int i = 0; i < 3; ++i) {
      const int fi = fine.free_index[t[i]];
      if (fi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int fj = fine.free_index[t[j]];
        if (fj < 0) continue;
        trip.emplace_back(fi, fj, scale * area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  SparseOperator m;
  m.matrix.resize(fine.free_count(), fine.free_count());
  m.matrix.setFromTriplets(trip.begin(), trip.end());
  m.symmetric = true;
  return m;
}

}  // namespace

SparseOperator assemble_mass(const MeshHierarchy& h) { return assemble_scaled_mass(h, false); }

SparseOperator assemble_weighted_mass_inv_h(const MeshHierarchy& h) {
  return assemble_scaled_mass(h, true);
}

double energy_norm(const SparseOperator& k, const Eigen::VectorXd& v) {
  if (k.rows() != v.size()) throw std::invalid_argument("energy_norm: dimension mismatch");
  const double q = v.dot(k.matrix * v);
  return std::sqrt(std::max(0.0, q));
}

FineNorms FineNorms::build(const MeshHierarchy& h) {
  FineNorms n;
  n.stiffness_identity = assemble_stiffness(h, CoefficientField::identity(h.fine.element_count()));
  n.mass = assemble_mass(h);
  n.weighted_mass = assemble_weighted_mass_inv_h(h);
  return n;
}

double scaled_load_norm(const MeshHierarchy& h, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != h.fine.element_count())
    throw std::invalid_argument("scaled_load_norm: rhs size does not match fine mesh");
  double s = 0.0;
  for (int e = 0; e < h.fine.element_count(); ++e) {
    const double d = h.coarse.element_diameters[h.fine_to_coarse_element[e]];
    s += d * d * f[e] * f[e] * h.fine.signed_area(e);
  }
  return std::sqrt(s);
}

FeFunction solve_reference(const MeshHierarchy& h, const SparseOperator& k,
                           const Eigen::VectorXd& b, double tol, SolveStats* stats) {
  const int n = k.rows();
  if (b.size() != n) throw std::invalid_argument("solve_reference: rhs dimension mismatch");

  FeFunction u;
  u.hierarchy = &h;
  u.values = Eigen::VectorXd::Zero(n);

  const double bnorm = b.norm();
  if (stats) *stats = {};
  if (bnorm == 0.0) return u;  // zero rhs solves in zero iterations

  Eigen::VectorXd inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = k.matrix.coeff(i, i);
    if (d <= 0.0) throw std::invalid_argument("solve_reference: non-positive diagonal entry");
    inv_diag[i] = 1.0 / d;
  }

  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.asDiagonal() * r;
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const long cap = 50L * n;
  long it = 0;
  while (r.norm() > tol * bnorm) {
    if (it >= cap)
      throw SolverError("solve_reference: iteration cap exceeded, residual " +
                        std::to_string(r.norm() / bnorm));
    const Eigen::VectorXd kp = k.matrix * p;
    const double alpha = rz / p.dot(kp);
    u.values += alpha * p;
    r -= alpha * kp;
    z = inv_diag.asDiagonal() * r;
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    ++it;
  }
  if (stats) {
    stats->iterations = static_cast<int>(it);
    stats->residual = r.norm() / bnorm;
  }
  return u;
}

}  // namespace homog
