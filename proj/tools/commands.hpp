#pragma once

#include <optional>
#include <string>

#include "run_config.hpp"

namespace ghost::cli {

enum ExitCode : int { kOk = 0, kInvalidConfig = 1, kNotConverged = 2, kStall = 3, kFailure = 4 };

struct CommandArgs {
  RunConfig config;
  std::optional<std::string> input;  // state, params, Hamiltonian or ansatz file
  std::optional<std::string> state;  // converged state (measure-dm only)
};

int cmd_selfconsist(const CommandArgs& args);
int cmd_avqite(const CommandArgs& args);
int cmd_spectra(const CommandArgs& args);
int cmd_measure_dm(const CommandArgs& args);
int cmd_iceberg(const CommandArgs& args);

}  // namespace ghost::cli
