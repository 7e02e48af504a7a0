#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "defaults_config.hpp"

namespace ghost::cli {

namespace {

bool non_negative_integer(const nlohmann::json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

void overlay(nlohmann::json& base, const nlohmann::json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config" + (path.empty() ? "" : " section '" + path + "'") + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + where + "'");
    auto& slot = base[key];
    if (slot.is_object()) {
      overlay(slot, value, where);
      continue;
    }
    const bool ok = slot.is_null()              ? (value.is_null() || non_negative_integer(value))
                    : slot.is_number_integer()  ? value.is_number_integer()
                    : slot.is_number()          ? value.is_number()
                    : slot.is_array()           ? value.is_array()
                                                : slot.type() == value.type();
    if (!ok) throw ConfigError("config key '" + where + "' has the wrong type");
    slot = value;
  }
}

template <class T>
T get(const nlohmann::json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

}  // namespace

const char* version() { return GHOST_EMBED_VERSION; }

const nlohmann::json& default_config() {
  static const nlohmann::json d = nlohmann::json::parse(kDefaultConfigJson);
  return d;
}

bool RunConfig::writes(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RunConfig resolve_config(const nlohmann::json& user, std::optional<std::uint64_t> seed) {
  nlohmann::json merged = default_config();
  if (!user.is_null()) overlay(merged, user, "");
  if (seed) {
    merged["noise"]["seed"] = *seed;
    merged["solver"]["seed"] = *seed;
  }

  RunConfig c;
  c.resolved = merged;
  const auto& model = merged["model"];
  c.U = get<double>(model, "U", "model");
  const auto B = get<std::int64_t>(model, "B", "model");
  require(B >= 1 && B % 2 == 1, "model.B must be a positive odd integer");
  c.B = static_cast<std::size_t>(B);

  const auto& solver = merged["solver"];
  c.solver_kind = get<std::string>(solver, "kind", "solver");
  require(c.solver_kind == "ed" || c.solver_kind == "avqite", "solver.kind must be 'ed' or 'avqite'");
  auto& sc = c.self_consistency;
  sc.alpha = get<double>(solver, "mixing", "solver");
  sc.tol = get<double>(solver, "tol", "solver");
  const auto max_iter = get<std::int64_t>(solver, "max_iter", "solver");
  sc.g = get<double>(solver, "g", "solver");
  sc.perturbation = get<double>(solver, "perturbation", "solver");
  require(sc.alpha > 0 && sc.alpha <= 1, "solver.mixing must lie in (0, 1]");
  require(sc.tol > 0, "solver.tol must be positive");
  require(max_iter > 0, "solver.max_iter must be positive");
  require(sc.g >= 0, "solver.g must be non-negative");
  sc.max_iter = static_cast<std::size_t>(max_iter);
  if (!solver["seed"].is_null()) sc.seed = solver["seed"].get<std::uint64_t>();
  c.eps_threshold = get<double>(solver, "eps_threshold", "solver");
  require(c.eps_threshold > 0, "solver.eps_threshold must be positive");
  for (const auto& d : solver["snapshot_depths"]) {
    require(non_negative_integer(d), "solver.snapshot_depths must hold non-negative integers");
    c.snapshot_depths.push_back(d.get<std::size_t>());
  }
  try {
    c.avqite = AvqiteConfig::from_json(solver["avqite"]);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver.") + e.what());
  }

  const auto n_nodes = get<std::int64_t>(merged["quadrature"], "n_nodes", "quadrature");
  require(n_nodes > 0, "quadrature.n_nodes must be positive");
  c.n_nodes = static_cast<std::size_t>(n_nodes);
  sc.n_nodes = c.n_nodes;

  const auto& sp = merged["spectra"];
  const double eta = get<double>(sp, "eta", "spectra");
  const double lo = get<double>(sp, "omega_min", "spectra"), hi = get<double>(sp, "omega_max", "spectra");
  const auto n_omega = get<std::int64_t>(sp, "n_omega", "spectra");
  require(eta > 0, "spectra.eta must be positive");
  require(lo < hi, "spectra.omega_min must be below omega_max");
  require(n_omega >= 2, "spectra.n_omega must be at least 2");
  c.freq = FrequencyGrid::linear(lo, hi, static_cast<std::size_t>(n_omega), eta);

  const auto& nz = merged["noise"];
  c.noise.noise_scale = get<double>(nz, "noise_scale", "noise");
  c.noise.p_bi = get<double>(nz, "p_bi", "noise");
  c.noise.p_1q = get<double>(nz, "p_1q", "noise");
  c.noise.p_2q = get<double>(nz, "p_2q", "noise");
  c.noise.p_bm = get<double>(nz, "p_bm", "noise");
  require(c.noise.noise_scale >= 0, "noise.noise_scale must be non-negative");
  for (double p : {c.noise.p_bi, c.noise.p_1q, c.noise.p_2q, c.noise.p_bm}) {
    require(p >= 0 && p <= 1, "noise probabilities must lie in [0, 1]");
  }
  const auto shots = get<std::int64_t>(nz, "shots", "noise");
  require(shots > 0, "noise.shots must be positive");
  c.shots = static_cast<std::size_t>(shots);
  require(non_negative_integer(nz["seed"]), "noise.seed must be a non-negative integer");
  c.seed = nz["seed"].get<std::uint64_t>();

  const auto& ice = merged["iceberg"];
  c.iceberg_enabled = get<bool>(ice, "enabled", "iceberg");
  const auto M = get<std::int64_t>(ice, "M", "iceberg");
  require(M >= 0, "iceberg.M must be non-negative");
  c.iceberg_M = static_cast<std::size_t>(M);
  for (const auto& m : ice["sweep_M"]) {
    require(non_negative_integer(m), "iceberg.sweep_M must hold non-negative integers");
    c.sweep_M.push_back(m.get<std::size_t>());
  }
  for (const auto& s : ice["sweep_noise_scales"]) {
    require(s.is_number() && s.get<double>() >= 0, "iceberg.sweep_noise_scales must hold non-negative numbers");
    c.sweep_noise_scales.push_back(s.get<double>());
  }

  const auto& out = merged["output"];
  c.out_dir = get<std::string>(out, "directory", "output");
  for (const auto& f : out["formats"]) {
    require(f.is_string(), "output.formats must be a list of strings");
    const auto s = f.get<std::string>();
    require(s == "json" || s == "csv" || s == "qasm", "output.formats: unknown format '" + s + "'");
    c.formats.push_back(s);
  }
  return c;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace ghost::cli
