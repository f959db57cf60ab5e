#include "homog/experiments.hpp"

#include "homog/coefficients.hpp"
#include "homog/corrector.hpp"
#include "homog/fem.hpp"
#include "homog/mesh.hpp"
#include "homog/multiscale.hpp"
#include "homog/quasi_interp.hpp"
#include "homog/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace homog {

namespace {

/// One fully assembled problem. The interpolation keeps a pointer into the
/// hierarchy, so instances are filled in place and never moved afterwards.
struct ProblemSetup {
  MeshHierarchy h;
  CoefficientField a;
  SparseOperator k;
  QuasiInterpolation q;
  std::vector<double> f;
  Eigen::VectorXd b;
  int nf = 0;
  int nc = 0;

  void init(const ExperimentConfig& cfg, int n, double contrast) {
    Triangulation coarse =
        (cfg.mesh_family == "crisscross") ? build_crisscross_mesh(n) : build_structured_mesh(n);
    h = refine_uniform(coarse, cfg.levels);
    nf = h.fine.free_count();
    if (nf > 70000)
      throw ConfigError("fine dof count " + std::to_string(nf) +
                        " exceeds the desk-scale budget of 70000");
    CoefficientSpec cs = cfg.coefficient;
    cs.contrast = contrast;
    a = generate_coefficient(cs, h);
    k = assemble_stiffness(h, a);
    q = build_pi(h);
    nc = static_cast<int>(q.prolong_matrix.cols());
    f.assign(static_cast<std::size_t>(h.fine.element_count()), cfg.rhs.value);
    b = assemble_load(h, f);
  }
};

/// Runs fn(0..count-1) on up to `workers` threads; results must go into
/// preallocated slots so the caller can emit them in index order. The first
/// captured exception is rethrown here.
template <typename Fn>
void parallel_rows(int count, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

double damped_rate(const SpectralEstimate& spec, double omega) {
  return std::max(std::abs(1.0 - omega * spec.lambda_min),
                  std::abs(1.0 - omega * spec.lambda_max));
}

int truncated_support(const SparseOperator& k, const Eigen::VectorXd& col) {
  const double drop = 1e-14 * energy_norm(k, col);
  int nnz = 0;
  for (int i = 0; i < col.size(); ++i)
    if (std::abs(col[i]) > drop) ++nnz;
  return nnz;
}

}  // namespace

CsvTable run_convergence(const ExperimentConfig& cfg) {
  const std::string hash = config_hash_hex(cfg);
  CsvTable t;
  t.header = {"H",        "h",     "dof_fine", "dof_coarse",   "ideal_error",
              "hf_norm",  "ratio", "wall_time_ms", "config_hash"};

  const int rows = static_cast<int>(cfg.n_values.size());
  std::vector<std::vector<std::string>> cells(static_cast<std::size_t>(rows));
  std::vector<double> errs(static_cast<std::size_t>(rows)), hfs(static_cast<std::size_t>(rows));

  parallel_rows(rows, cfg.threads, [&](int i) {
    const auto start = std::chrono::steady_clock::now();
    const int n = cfg.n_values[static_cast<std::size_t>(i)];
    ProblemSetup s;
    s.init(cfg, n, cfg.coefficient.contrast);
    const Eigen::VectorXd u = solve_reference(s.h, s.k, s.b, cfg.solver_tol).values;
    CorrectorEngine eng(s.h, s.q, s.k);
    const MultiscaleSpace space = build_space(eng, SpaceMode::exact, 0);
    const GalerkinSolution sol = galerkin_solve(space, s.k, s.b);
    const double err = energy_norm(s.k, u - sol.w);
    const double hf = scaled_load_norm(s.h, s.f);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    errs[static_cast<std::size_t>(i)] = err;
    hfs[static_cast<std::size_t>(i)] = hf;
    cells[static_cast<std::size_t>(i)] = {shortest_repr(1.0 / n),
                                          shortest_repr(1.0 / (n * (1 << cfg.levels))),
                                          std::to_string(s.nf),
                                          std::to_string(s.nc),
                                          shortest_repr(err),
                                          shortest_repr(hf),
                                          shortest_repr(hf > 0.0 ? err / hf : 0.0),
                                          std::to_string(ms),
                                          hash};
  });

  for (auto& row : cells) t.add_row(std::move(row));
  t.write(out_path(cfg, "convergence.csv"));
  if (cfg.svg) {
    std::vector<double> xs;
    for (int n : cfg.n_values) xs.push_back(n);
    write_svg_loglinear(out_path(cfg, "convergence.svg"), "ideal error vs 1/H",
                        {{"ideal_error", xs, errs}, {"hf_norm", xs, hfs}});
  }
  return t;
}

CsvTable run_decay(const ExperimentConfig& cfg) {
  if (cfg.n_values.size() != 1)
    throw ConfigError("decay expects exactly one mesh.n value");
  const std::string hash = config_hash_hex(cfg);

  ProblemSetup s;
  s.init(cfg, cfg.n_values.front(), cfg.coefficient.contrast);
  CorrectorEngine::Options opts;
  opts.threads = cfg.threads;
  CorrectorEngine eng(s.h, s.q, s.k, opts);
  const SpectralEstimate spec = eng.estimate_spectrum(cfg.lanczos_steps, cfg.spectrum_seed);

  const bool cheb = (cfg.scheme == "chebyshev");
  const double omega =
      cfg.omega > 0.0 ? cfg.omega : 2.0 / (spec.lambda_min + spec.lambda_max);
  const double q_used = cheb ? spec.q_cheb : damped_rate(spec, omega);

  const int lmax = cfg.ell_max;
  std::vector<double> measured(static_cast<std::size_t>(lmax) + 1, 0.0);
  std::vector<int> support(static_cast<std::size_t>(lmax) + 1, 0);
  for (int r = 0; r < s.nc; ++r) {
    const Eigen::VectorXd phi = s.q.prolong_matrix.col(r);
    const Eigen::VectorXd cphi = eng.exact_corrector(phi);
    const double cnorm = energy_norm(s.k, cphi);
    const std::vector<Eigen::VectorXd> it = cheb
                                                ? eng.chebyshev_corrector_iterates(phi, lmax, spec)
                                                : eng.damped_corrector_iterates(phi, lmax, omega);
    for (int l = 0; l <= lmax; ++l) {
      if (cnorm > 0.0) {
        const double e = energy_norm(s.k, cphi - it[static_cast<std::size_t>(l)]) / cnorm;
        measured[static_cast<std::size_t>(l)] = std::max(measured[static_cast<std::size_t>(l)], e);
      }
      support[static_cast<std::size_t>(l)] =
          std::max(support[static_cast<std::size_t>(l)],
                   truncated_support(s.k, phi - it[static_cast<std::size_t>(l)]));
    }
  }

  CsvTable t;
  t.header = {"ell", "measured_max", "bound", "q_used", "max_support", "config_hash"};
  std::vector<double> xs, ms, bs;
  for (int l = cfg.ell_min; l <= lmax; ++l) {
    const double bound = cheb ? spec.chebyshev_bound(l) : std::pow(q_used, l);
    t.add_row({std::to_string(l), shortest_repr(measured[static_cast<std::size_t>(l)]),
               shortest_repr(bound), shortest_repr(q_used),
               std::to_string(support[static_cast<std::size_t>(l)]), hash});
    xs.push_back(l);
    ms.push_back(measured[static_cast<std::size_t>(l)]);
    bs.push_back(bound);
  }
  t.write(out_path(cfg, "decay.csv"));
  if (cfg.svg)
    write_svg_loglinear(out_path(cfg, "decay.svg"), "basis correction decay vs ell",
                        {{"measured_max", xs, ms}, {"bound", xs, bs}});
  return t;
}

CsvTable run_localization(const ExperimentConfig& cfg) {
  if (cfg.n_values.size() != 1)
    throw ConfigError("localization expects exactly one mesh.n value");
  if (cfg.scheme != "chebyshev")
    throw ConfigError("localization studies the accelerated scheme; set iteration.scheme to "
                      "'chebyshev'");
  const std::string hash = config_hash_hex(cfg);

  ProblemSetup s;
  s.init(cfg, cfg.n_values.front(), cfg.coefficient.contrast);
  const Eigen::VectorXd u = solve_reference(s.h, s.k, s.b, cfg.solver_tol).values;
  CorrectorEngine::Options opts;
  opts.threads = cfg.threads;
  CorrectorEngine eng(s.h, s.q, s.k, opts);
  const SpectralEstimate spec = eng.estimate_spectrum(cfg.lanczos_steps, cfg.spectrum_seed);

  const MultiscaleSpace exact = build_space(eng, SpaceMode::exact, 0);
  const Eigen::VectorXd w_exact = galerkin_solve(exact, s.k, s.b).w;
  const double hf = scaled_load_norm(s.h, s.f);

  CsvTable t;
  t.header = {"ell",    "energy_error", "ideal_error",     "interp_error",
              "q_used", "bound",        "bound_satisfied", "config_hash"};
  for (int l = cfg.ell_min; l <= cfg.ell_max; ++l) {
    const MultiscaleSpace space = build_space(eng, SpaceMode::collapsed, l, &spec);
    const Eigen::VectorXd w = galerkin_solve(space, s.k, s.b).w;
    const ErrorReport rep = evaluate_errors(s.k, s.q, u, w, w_exact, spec, l, hf);
    t.add_row({std::to_string(l), shortest_repr(rep.energy_error),
               shortest_repr(rep.ideal_error), shortest_repr(rep.interp_error),
               shortest_repr(spec.q_cheb), shortest_repr(rep.localization_bound),
               rep.bound_satisfied ? "1" : "0", hash});
  }
  t.write(out_path(cfg, "localization.csv"));
  return t;
}

CsvTable run_spectrum(const ExperimentConfig& cfg) {
  const std::string hash = config_hash_hex(cfg);
  std::vector<double> contrasts = cfg.contrasts;
  if (contrasts.empty()) contrasts.push_back(cfg.coefficient.contrast);

  struct Point {
    int n;
    double contrast;
  };
  std::vector<Point> grid;
  for (int n : cfg.n_values)
    for (double c : contrasts) grid.push_back({n, c});

  const int rows = static_cast<int>(grid.size());
  std::vector<std::vector<std::string>> cells(static_cast<std::size_t>(rows));

  parallel_rows(rows, cfg.threads, [&](int i) {
    const Point& p = grid[static_cast<std::size_t>(i)];
    ProblemSetup s;
    s.init(cfg, p.n, p.contrast);
    CorrectorEngine eng(s.h, s.q, s.k);
    const SpectralEstimate spec = eng.estimate_spectrum(cfg.lanczos_steps, cfg.spectrum_seed);

    // Decomposition constant: worst energy blowup of the hat-function
    // splitting over a fixed set of random kernel directions.
    SplitMix64 rng(cfg.spectrum_seed);
    double k1 = 0.0;
    for (int sample = 0; sample < cfg.decomposition_samples; ++sample) {
      Eigen::VectorXd v(s.nf);
      for (int d = 0; d < s.nf; ++d) v[d] = 2.0 * rng.uniform() - 1.0;
      v = s.q.kernel_project(v);
      const auto pieces = stable_decomposition(s.q, v);
      k1 = std::max(k1, decomposition_energy_ratio(pieces, v, s.k));
    }

    cells[static_cast<std::size_t>(i)] = {std::to_string(p.n),
                                          shortest_repr(1.0 / p.n),
                                          shortest_repr(p.contrast),
                                          shortest_repr(spec.lambda_min),
                                          shortest_repr(spec.lambda_max),
                                          shortest_repr(spec.kappa),
                                          shortest_repr(spec.q_cheb),
                                          shortest_repr(spec.q_damped),
                                          shortest_repr(k1),
                                          hash};
  });

  CsvTable t;
  t.header = {"n",      "H",      "contrast", "lambda_min",  "lambda_max",
              "kappa",  "q_cheb", "q_damped", "k1_measured", "config_hash"};
  for (auto& row : cells) t.add_row(std::move(row));
  t.write(out_path(cfg, "spectrum.csv"));
  return t;
}

namespace {

ExperimentConfig battery_config(const ExperimentConfig& base, const std::string& family, int n,
                                int levels, const std::string& kind) {
  ExperimentConfig c;
  c.mesh_family = family;
  c.n_values = {n};
  c.levels = levels;
  c.coefficient.kind = kind;
  c.coefficient.epsilon = 0.125;
  c.ell_min = 0;
  c.ell_max = 4;
  // nested command outputs land in a work subdirectory; the selftest summary
  // files sit next to it
  c.out_dir = (std::filesystem::path(base.out_dir) / "selftest_work").string();
  c.threads = base.threads;
  return c;
}

double sampled_k1(const ProblemSetup& s, const ExperimentConfig& c) {
  SplitMix64 rng(c.spectrum_seed);
  double k1 = 0.0;
  for (int sample = 0; sample < c.decomposition_samples; ++sample) {
    Eigen::VectorXd v(s.nf);
    for (int d = 0; d < s.nf; ++d) v[d] = 2.0 * rng.uniform() - 1.0;
    v = s.q.kernel_project(v);
    k1 = std::max(k1, decomposition_energy_ratio(stable_decomposition(s.q, v), v, s.k));
  }
  return k1;
}

}  // namespace

void run_selftest(const ExperimentConfig& cfg) {
  std::vector<std::string> violations;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) violations.push_back(what);
  };

  // Single-interior-vertex configuration: the correction operator is the
  // identity on the kernel, so both spectrum ends must sit at one.
  CsvTable spectrum_table;
  spectrum_table.header = {"case",       "lambda_min", "lambda_max", "kappa",
                           "q_cheb",     "q_damped",   "k1_measured", "config_hash"};
  {
    ExperimentConfig c = battery_config(cfg, "crisscross", 1, 1, "identity");
    ProblemSetup s;
    s.init(c, 1, 1.0);
    CorrectorEngine::Options opts;
    opts.threads = cfg.threads;
    CorrectorEngine eng(s.h, s.q, s.k, opts);
    const SpectralEstimate spec = eng.estimate_spectrum(c.lanczos_steps, c.spectrum_seed);
    check(std::abs(spec.lambda_min - 1.0) <= 1e-8 && std::abs(spec.lambda_max - 1.0) <= 1e-8,
          "single-interior-vertex spectrum is not {1}");
    spectrum_table.add_row({"crisscross_n1", shortest_repr(spec.lambda_min),
                            shortest_repr(spec.lambda_max), shortest_repr(spec.kappa),
                            shortest_repr(spec.q_cheb), shortest_repr(spec.q_damped),
                            shortest_repr(sampled_k1(s, c)), config_hash_hex(c)});
  }

  const struct {
    const char* family;
    int n, levels;
    const char* kind;
  } batteries[] = {{"diagonal", 4, 1, "identity"}, {"diagonal", 8, 2, "periodic"}};

  CsvTable decay_all, loc_all;
  for (const auto& bat : batteries) {
    ExperimentConfig c = battery_config(cfg, bat.family, bat.n, bat.levels, bat.kind);
    ProblemSetup s;
    s.init(c, bat.n, 1.0);
    CorrectorEngine::Options opts;
    opts.threads = cfg.threads;
    CorrectorEngine eng(s.h, s.q, s.k, opts);
    const SpectralEstimate spec = eng.estimate_spectrum(c.lanczos_steps, c.spectrum_seed);
    check(spec.lambda_min > 0.0, std::string(bat.kind) + ": lambda_min must be positive");

    // decomposition constant, same sampling as the spectrum command
    const double k1 = sampled_k1(s, c);
    check(std::isfinite(k1) && k1 > 0.0, std::string(bat.kind) + ": decomposition constant");
    spectrum_table.add_row({std::string(bat.family) + "_n" + std::to_string(bat.n) + "_" +
                                bat.kind,
                            shortest_repr(spec.lambda_min), shortest_repr(spec.lambda_max),
                            shortest_repr(spec.kappa), shortest_repr(spec.q_cheb),
                            shortest_repr(spec.q_damped), shortest_repr(k1), config_hash_hex(c)});

    // Chebyshev step weights have to sum to one for any step count.
    for (int l = 1; l <= 4; ++l) {
      const auto w = CorrectorEngine::chebyshev_weights(l, spec);
      double sum = 0.0;
      for (double x : w) sum += x;
      check(std::abs(sum - 1.0) <= 1e-12,
            std::string(bat.kind) + ": chebyshev weights do not sum to 1 at ell " +
                std::to_string(l));
    }

    // The exact correction must be a projection, and the recovery identity
    // must hold for every exact basis column.
    {
      const Eigen::VectorXd phi = s.q.prolong_matrix.col(0);
      const Eigen::VectorXd cu = eng.exact_corrector(phi);
      const double cn = energy_norm(s.k, cu);
      check(energy_norm(s.k, eng.exact_corrector(cu) - cu) <= 1e-10 * std::max(1.0, cn),
            std::string(bat.kind) + ": exact correction is not idempotent");
      const MultiscaleSpace space = build_space(eng, SpaceMode::exact, 0);
      double worst = 0.0;
      for (int r = 0; r < space.columns(); ++r) {
        Eigen::VectorXd e = s.q.apply_pi(space.basis.col(r));
        e[space.column_vertex[static_cast<std::size_t>(r)]] -= 1.0;
        worst = std::max(worst, e.cwiseAbs().maxCoeff());
      }
      check(worst <= 1e-10, std::string(bat.kind) + ": basis recovery identity failed");
    }

    CsvTable d = run_decay(c);
    for (std::size_t r = 0; r < d.rows.size(); ++r) {
      const double m = std::stod(d.rows[r][1]);
      const double bound = std::stod(d.rows[r][2]);
      check(m <= bound * (1.0 + 1e-12),
            std::string(bat.kind) + ": decay bound violated at ell " + d.rows[r][0]);
      decay_all.rows.push_back(d.rows[r]);
    }
    decay_all.header = d.header;

    CsvTable loc = run_localization(c);
    for (std::size_t r = 0; r < loc.rows.size(); ++r) {
      check(loc.rows[r][6] == "1",
            std::string(bat.kind) + ": localization bound violated at ell " + loc.rows[r][0]);
      loc_all.rows.push_back(loc.rows[r]);
    }
    loc_all.header = loc.header;
  }

  spectrum_table.write(out_path(cfg, "selftest_spectrum.csv"));
  decay_all.write(out_path(cfg, "selftest_decay.csv"));
  loc_all.write(out_path(cfg, "selftest_localization.csv"));

  if (!violations.empty()) {
    std::ostringstream msg;
    msg << violations.size() << " selftest bound violation(s):";
    for (const auto& v : violations) msg << "\n  " << v;
    throw BoundViolation(msg.str());
  }
}

}  // namespace homog
