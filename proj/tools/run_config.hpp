#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghost/avqite.hpp"
#include "ghost/qsim.hpp"
#include "ghost/self_consistency.hpp"
#include "ghost/spectra.hpp"
#include "json.hpp"

namespace ghost::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* version();

/// Built-in defaults (config/defaults.json, compiled in).
const nlohmann::json& default_config();

/// Typed view of a resolved configuration.
struct RunConfig {
  nlohmann::json resolved;

  double U = 2.5;
  std::size_t B = 3;
  std::string solver_kind = "ed";
  SelfConsistencyConfig self_consistency;
  AvqiteConfig avqite;
  double eps_threshold = 0.01;
  std::vector<std::size_t> snapshot_depths;

  std::size_t n_nodes = 1000;
  FrequencyGrid freq;

  NoiseModel noise;
  std::size_t shots = 100000;
  std::uint64_t seed = 1;

  bool iceberg_enabled = false;
  std::size_t iceberg_M = 2;
  std::vector<std::size_t> sweep_M;
  std::vector<double> sweep_noise_scales;

  std::string out_dir = "out";
  std::vector<std::string> formats;
  bool writes(const std::string& format) const;
};

/// Overlays `user` on the defaults. Unknown keys, type mismatches and values
/// out of range raise ConfigError. `seed` replaces noise.seed and solver.seed.
RunConfig resolve_config(const nlohmann::json& user, std::optional<std::uint64_t> seed = std::nullopt);

nlohmann::json read_json_file(const std::string& path);

}  // namespace ghost::cli
