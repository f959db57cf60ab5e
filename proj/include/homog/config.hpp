#pragma once

#include "homog/coefficients.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace homog {

/// Raised for malformed or out-of-range configuration input; the CLI maps it
/// to its own exit code, distinct from solver failures.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RhsSpec {
  std::string kind = "constant";
  double value = 1.0;
};

/// Everything one experiment run depends on. Parsed from a strict JSON
/// document (unknown keys rejected with their path); the output directory,
/// SVG switch and thread count arrive as command line flags and do not enter
/// the config hash.
struct ExperimentConfig {
  std::string mesh_family = "diagonal";  // diagonal | crisscross
  std::vector<int> n_values = {8};       // coarse subdivisions, H = 1/n
  int levels = 2;                        // fine h = H / 2^levels

  CoefficientSpec coefficient;
  std::vector<double> contrasts;  // spectrum grid; defaults to {coefficient.contrast}
  RhsSpec rhs;

  std::string scheme = "chebyshev";  // chebyshev | damped
  int ell_min = 0;
  int ell_max = 6;
  double omega = 0.0;  // damped scheme; 0 picks 2/(lmin+lmax)

  double solver_tol = 1e-10;
  int lanczos_steps = 60;
  std::uint64_t spectrum_seed = 1;
  int decomposition_samples = 8;

  // command line, not hashed
  std::string out_dir = ".";
  bool svg = false;
  int threads = 1;

  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

/// Canonical one-line rendering of the semantic fields; its FNV-1a hash is
/// echoed into every CSV row so results stay traceable to their input.
std::string canonical_config(const ExperimentConfig& c);
std::uint64_t config_hash(const ExperimentConfig& c);
std::string config_hash_hex(const ExperimentConfig& c);

}  // namespace homog
