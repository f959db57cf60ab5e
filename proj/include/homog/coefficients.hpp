#pragma once

#include "homog/fem.hpp"
#include "homog/mesh.hpp"

#include <cstdint>
#include <string>

namespace homog {

/// Recipe for a coefficient field on the fine mesh. Periodic oscillation,
/// random checkerboards and stripe channels all share the period length
/// `epsilon`; `contrast` is the intended ratio of the largest to the smallest
/// value and `seed` feeds the checkerboard draw.
struct CoefficientSpec {
  std::string kind = "identity";  // identity | periodic | checkerboard | channels
  double epsilon = 0.25;
  double contrast = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Samples the spec on the fine elements (at centroids for the smooth kinds)
/// and returns the field with its measured ellipticity window. The period
/// must be resolved by the fine mesh: epsilon <= fine h is rejected.
CoefficientField generate_coefficient(const CoefficientSpec& spec, const MeshHierarchy& h);

}  // namespace homog
