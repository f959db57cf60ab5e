#include "homog/config.hpp"
#include "homog/experiments.hpp"
#include "homog/fem.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <memory>
#include <functional>
#include <string>

namespace {

// exit codes: 0 success, 2 config error, 3 solver failure, 4 selftest bound
// violation
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kBoundViolation = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homog: numerical homogenization studies on the unit square"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string out_dir = ".";
  bool svg = false;
  int threads = 1;
  double tol_override = 0.0;

  struct Cmd {
    CLI::App* sub;
    std::string config_path;
    std::function<void(const homog::ExperimentConfig&)> run;
  };
  // The option parser stores raw pointers to config_path, so every Cmd needs
  // a stable address for the lifetime of the app.
  std::vector<std::unique_ptr<Cmd>> cmds;

  auto add_cmd = [&](const std::string& name, const std::string& desc, bool needs_config,
                     std::function<void(const homog::ExperimentConfig&)> run) {
    cmds.push_back(std::make_unique<Cmd>(Cmd{app.add_subcommand(name, desc), "", std::move(run)}));
    Cmd& c = *cmds.back();
    if (needs_config)
      c.sub->add_option("config", c.config_path, "JSON config file")->required();
    c.sub->add_option("--out", out_dir, "output directory for CSV/SVG files");
    c.sub->add_flag("--svg", svg, "also write SVG plots where supported");
    c.sub->add_option("--threads", threads, "worker threads (results are thread-count invariant)");
    c.sub->add_option("--tol", tol_override, "override the reference solver tolerance");
  };

  add_cmd("convergence", "ideal-space error against the scaled load norm over an H sweep", true,
          [](const homog::ExperimentConfig& c) { homog::run_convergence(c); });
  add_cmd("decay", "per-vertex corrector iteration decay against the predicted rate", true,
          [](const homog::ExperimentConfig& c) { homog::run_decay(c); });
  add_cmd("localization", "localized-space energy error against the measured-spectrum bound",
          true, [](const homog::ExperimentConfig& c) { homog::run_localization(c); });
  add_cmd("spectrum", "correction operator eigenvalue window over an (H, contrast) grid", true,
          [](const homog::ExperimentConfig& c) { homog::run_spectrum(c); });
  add_cmd("selftest", "fixed deterministic battery; nonzero exit on any violated guarantee",
          false, [](const homog::ExperimentConfig& c) { homog::run_selftest(c); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    for (const auto& cp : cmds) {
      const Cmd& c = *cp;
      if (!c.sub->parsed()) continue;
      homog::ExperimentConfig cfg;
      if (!c.config_path.empty()) cfg = homog::parse_config_file(c.config_path);
      cfg.out_dir = out_dir;
      cfg.svg = svg;
      cfg.threads = threads;
      if (tol_override > 0.0) cfg.solver_tol = tol_override;
      cfg.validate();
      c.run(cfg);
    }
  } catch (const homog::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const homog::BoundViolation& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kBoundViolation;
  } catch (const homog::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kSolverError;
  }
  return kOk;
}
