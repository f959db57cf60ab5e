#pragma once

#include "homog/config.hpp"
#include "homog/report.hpp"

#include <stdexcept>

namespace homog {

/// Raised by the selftest when a guaranteed bound fails; the CLI maps it to
/// its own exit code so CI can tell "broken math" from "broken input".
struct BoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The study commands. Each writes `<name>.csv` (and for the first two an
/// optional SVG) into cfg.out_dir and returns the table it wrote. Sweep rows
/// appear in config order and are byte-identical for any thread count.
///
/// convergence: per coarse size H, the ideal-space Galerkin error against
///   the scaled load norm; the ratio column is the oscillation-independent
///   constant under test.
/// decay: per iteration count ell, the worst per-vertex distance between the
///   exact and the iterated basis correction, against the predicted rate.
/// localization: per ell, the energy error of the collapsed localized space
///   next to the bound assembled from the measured spectrum.
/// spectrum: per (H, contrast) grid point, the extreme eigenvalues of the
///   correction operator plus the measured decomposition constant.
CsvTable run_convergence(const ExperimentConfig& cfg);
CsvTable run_decay(const ExperimentConfig& cfg);
CsvTable run_localization(const ExperimentConfig& cfg);
CsvTable run_spectrum(const ExperimentConfig& cfg);

/// Fixed built-in battery over three small problems. Writes
/// selftest_spectrum.csv, selftest_decay.csv and selftest_localization.csv
/// into out_dir, then throws BoundViolation if any mathematically guaranteed
/// property failed. Only out_dir and threads are read from cfg; everything
/// else is pinned so the output is reproducible down to the byte.
void run_selftest(const ExperimentConfig& cfg);

}  // namespace homog
