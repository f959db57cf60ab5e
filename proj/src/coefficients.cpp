#include "homog/coefficients.hpp"

#include "homog/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace homog {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector2d centroid(const Triangulation& tri, int elem) {
  const auto& t = tri.triangles[static_cast<std::size_t>(elem)];
  return (tri.vertices[static_cast<std::size_t>(t[0])] +
          tri.vertices[static_cast<std::size_t>(t[1])] +
          tri.vertices[static_cast<std::size_t>(t[2])]) /
         3.0;
}

int cell_of(double x, double eps, int cells) {
  int i = static_cast<int>(std::floor(x / eps));
  return std::clamp(i, 0, cells - 1);
}

}  // namespace

void CoefficientSpec::validate() const {
  if (kind != "identity" && kind != "periodic" && kind != "checkerboard" && kind != "channels")
    throw std::invalid_argument("coefficient kind must be identity, periodic, checkerboard or "
                                "channels, got '" +
                                kind + "'");
  if (kind == "identity") return;
  if (!(epsilon > 0.0)) throw std::invalid_argument("coefficient epsilon must be positive");
  if (!(contrast >= 1.0)) throw std::invalid_argument("coefficient contrast must be >= 1");
}

CoefficientField generate_coefficient(const CoefficientSpec& spec, const MeshHierarchy& h) {
  spec.validate();
  const int ne = h.fine.element_count();
  if (spec.kind == "identity") return CoefficientField::identity(ne);

  const double fine_h =
      *std::max_element(h.fine.element_diameters.begin(), h.fine.element_diameters.end());
  if (spec.epsilon <= fine_h)
    throw std::invalid_argument("coefficient epsilon is not resolved by the fine mesh (epsilon " +
                                std::to_string(spec.epsilon) + " <= fine h " +
                                std::to_string(fine_h) + ")");

  std::vector<double> scalar(static_cast<std::size_t>(ne), 1.0);

  if (spec.kind == "periodic") {
    for (int e = 0; e < ne; ++e) {
      const Eigen::Vector2d c = centroid(h.fine, e);
      scalar[static_cast<std::size_t>(e)] = (2.0 + std::sin(2.0 * kPi * c.x() / spec.epsilon)) *
                                            (2.0 + std::sin(2.0 * kPi * c.y() / spec.epsilon));
    }
  } else if (spec.kind == "checkerboard") {
    // One value per epsilon-cell, drawn log-uniformly in [1, contrast] from
    // the documented mixing generator; the draw order is row-major over the
    // cell grid so the field depends on the seed alone, not on the mesh.
    const int cells = static_cast<int>(std::ceil(1.0 / spec.epsilon - 1e-12));
    SplitMix64 rng(spec.seed);
    std::vector<double> cell_value(static_cast<std::size_t>(cells) * cells);
    const double log_contrast = std::log(spec.contrast);
    for (auto& v : cell_value) v = std::exp(rng.uniform() * log_contrast);
    for (int e = 0; e < ne; ++e) {
      const Eigen::Vector2d c = centroid(h.fine, e);
      const int ix = cell_of(c.x(), spec.epsilon, cells);
      const int iy = cell_of(c.y(), spec.epsilon, cells);
      scalar[static_cast<std::size_t>(e)] =
          cell_value[static_cast<std::size_t>(iy) * cells + ix];
    }
  } else {  // channels
    for (int e = 0; e < ne; ++e) {
      const Eigen::Vector2d c = centroid(h.fine, e);
      const int stripe = static_cast<int>(std::floor(c.y() / spec.epsilon));
      scalar[static_cast<std::size_t>(e)] = (stripe % 2 == 1) ? spec.contrast : 1.0;
    }
  }

  return CoefficientField::isotropic(scalar, spec.kind);
}

}  // namespace homog
