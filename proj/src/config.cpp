#include "homog/config.hpp"

#include "homog/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace homog {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (allowed.count(item.key()) == 0)
      throw ConfigError("unknown config key '" + path + item.key() + "'");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError("'" + path + "' must be a number");
  return v.get<double>();
}

int int_at(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError("'" + path + "' must be an integer");
  return v.get<int>();
}

std::string string_at(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError("'" + path + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown_keys(doc, "", {"mesh", "coefficient", "rhs", "iteration", "solver"});

  ExperimentConfig cfg;

  const json* mesh = find(doc, "mesh");
  if (mesh == nullptr) throw ConfigError("config needs a 'mesh' section");
  reject_unknown_keys(*mesh, "mesh.", {"family", "n", "levels"});
  if (const json* v = find(*mesh, "family")) cfg.mesh_family = string_at(*v, "mesh.family");
  if (const json* v = find(*mesh, "n")) {
    cfg.n_values.clear();
    if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i)
        cfg.n_values.push_back(int_at((*v)[i], "mesh.n[" + std::to_string(i) + "]"));
    } else {
      cfg.n_values.push_back(int_at(*v, "mesh.n"));
    }
  }
  if (const json* v = find(*mesh, "levels")) cfg.levels = int_at(*v, "mesh.levels");

  if (const json* coeff = find(doc, "coefficient")) {
    reject_unknown_keys(*coeff, "coefficient.",
                        {"kind", "epsilon", "contrast", "contrasts", "seed"});
    if (const json* v = find(*coeff, "kind")) cfg.coefficient.kind = string_at(*v, "coefficient.kind");
    const bool needs_epsilon = cfg.coefficient.kind != "identity";
    if (const json* v = find(*coeff, "epsilon"))
      cfg.coefficient.epsilon = number_at(*v, "coefficient.epsilon");
    else if (needs_epsilon)
      throw ConfigError("'coefficient.epsilon' is required for kind '" + cfg.coefficient.kind +
                        "'");
    if (const json* v = find(*coeff, "contrast"))
      cfg.coefficient.contrast = number_at(*v, "coefficient.contrast");
    if (const json* v = find(*coeff, "seed")) {
      if (!v->is_number_unsigned() && !v->is_number_integer())
        throw ConfigError("'coefficient.seed' must be an integer");
      cfg.coefficient.seed = v->get<std::uint64_t>();
    } else if (cfg.coefficient.kind == "checkerboard") {
      throw ConfigError("'coefficient.seed' is required for the checkerboard kind");
    }
    if (const json* v = find(*coeff, "contrasts")) {
      if (!v->is_array()) throw ConfigError("'coefficient.contrasts' must be an array");
      for (std::size_t i = 0; i < v->size(); ++i)
        cfg.contrasts.push_back(
            number_at((*v)[i], "coefficient.contrasts[" + std::to_string(i) + "]"));
    }
  }

  if (const json* rhs = find(doc, "rhs")) {
    reject_unknown_keys(*rhs, "rhs.", {"kind", "value"});
    if (const json* v = find(*rhs, "kind")) cfg.rhs.kind = string_at(*v, "rhs.kind");
    if (const json* v = find(*rhs, "value")) cfg.rhs.value = number_at(*v, "rhs.value");
  }

  if (const json* it = find(doc, "iteration")) {
    reject_unknown_keys(*it, "iteration.", {"scheme", "ell_min", "ell_max", "omega"});
    if (const json* v = find(*it, "scheme")) cfg.scheme = string_at(*v, "iteration.scheme");
    if (const json* v = find(*it, "ell_min")) cfg.ell_min = int_at(*v, "iteration.ell_min");
    if (const json* v = find(*it, "ell_max")) cfg.ell_max = int_at(*v, "iteration.ell_max");
    if (const json* v = find(*it, "omega")) cfg.omega = number_at(*v, "iteration.omega");
  }

  if (const json* sv = find(doc, "solver")) {
    reject_unknown_keys(*sv, "solver.",
                        {"tol", "lanczos_steps", "spectrum_seed", "decomposition_samples"});
    if (const json* v = find(*sv, "tol")) cfg.solver_tol = number_at(*v, "solver.tol");
    if (const json* v = find(*sv, "lanczos_steps"))
      cfg.lanczos_steps = int_at(*v, "solver.lanczos_steps");
    if (const json* v = find(*sv, "spectrum_seed")) {
      if (!v->is_number_unsigned() && !v->is_number_integer())
        throw ConfigError("'solver.spectrum_seed' must be an integer");
      cfg.spectrum_seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(*sv, "decomposition_samples"))
      cfg.decomposition_samples = int_at(*v, "solver.decomposition_samples");
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

void ExperimentConfig::validate() const {
  if (mesh_family != "diagonal" && mesh_family != "crisscross")
    throw ConfigError("mesh.family must be 'diagonal' or 'crisscross', got '" + mesh_family + "'");
  if (n_values.empty()) throw ConfigError("mesh.n must list at least one subdivision");
  const int n_min = (mesh_family == "crisscross") ? 1 : 2;
  for (int n : n_values) {
    if (n < n_min || n > 128)
      throw ConfigError("mesh.n entries must lie in [" + std::to_string(n_min) + ", 128]");
  }
  if (levels < 1 || levels > 6) throw ConfigError("mesh.levels must lie in [1, 6]");
  for (int n : n_values) {
    if (n * (1 << levels) > 300)
      throw ConfigError("mesh.n * 2^levels exceeds the desk-scale budget (max 300 cells/axis)");
  }

  try {
    coefficient.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (double c : contrasts)
    if (!(c >= 1.0)) throw ConfigError("coefficient.contrasts entries must be >= 1");

  if (rhs.kind != "constant") throw ConfigError("rhs.kind must be 'constant'");
  if (!std::isfinite(rhs.value)) throw ConfigError("rhs.value must be finite");

  if (scheme != "chebyshev" && scheme != "damped")
    throw ConfigError("iteration.scheme must be 'chebyshev' or 'damped'");
  if (ell_min < 0 || ell_max < ell_min || ell_max > 12)
    throw ConfigError("iteration ell range must satisfy 0 <= ell_min <= ell_max <= 12");
  if (!(omega >= 0.0) || omega >= 2.0) throw ConfigError("iteration.omega must lie in [0, 2)");

  if (!(solver_tol >= 1e-14) || !(solver_tol <= 1e-2))
    throw ConfigError("solver.tol must lie in [1e-14, 1e-2]");
  if (lanczos_steps < 10 || lanczos_steps > 200)
    throw ConfigError("solver.lanczos_steps must lie in [10, 200]");
  if (decomposition_samples < 1 || decomposition_samples > 100)
    throw ConfigError("solver.decomposition_samples must lie in [1, 100]");
  if (threads < 1 || threads > 64) throw ConfigError("threads must lie in [1, 64]");
}

std::string canonical_config(const ExperimentConfig& c) {
  std::ostringstream s;
  s << "family=" << c.mesh_family << ";n=";
  for (std::size_t i = 0; i < c.n_values.size(); ++i) {
    if (i > 0) s << ',';
    s << c.n_values[i];
  }
  s << ";levels=" << c.levels;
  s << ";coeff=" << c.coefficient.kind << ",eps=" << shortest_repr(c.coefficient.epsilon)
    << ",contrast=" << shortest_repr(c.coefficient.contrast) << ",seed=" << c.coefficient.seed;
  s << ";contrasts=";
  for (std::size_t i = 0; i < c.contrasts.size(); ++i) {
    if (i > 0) s << ',';
    s << shortest_repr(c.contrasts[i]);
  }
  s << ";rhs=" << c.rhs.kind << "," << shortest_repr(c.rhs.value);
  s << ";scheme=" << c.scheme << ";ell=" << c.ell_min << ".." << c.ell_max
    << ";omega=" << shortest_repr(c.omega);
  s << ";tol=" << shortest_repr(c.solver_tol) << ";lanczos=" << c.lanczos_steps
    << ";sseed=" << c.spectrum_seed << ";samples=" << c.decomposition_samples;
  return s.str();
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  const std::string s = canonical_config(c);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash_hex(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash(c)));
  return std::string(buf);
}

}  // namespace homog
