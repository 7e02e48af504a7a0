#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace ghost::cli;
  CLI::App app{"Ghost-Gutzwiller embedding with AVQITE impurity solver, noise and Iceberg studies"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string input, state;

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const CommandArgs&);
  };
  const Command commands[] = {
      {"selfconsist", "Converge the gGA loop for model.U and model.B", cmd_selfconsist},
      {"avqite", "Prepare the embedding ground state with AVQITE (--input: state, params or Hamiltonian file)",
       cmd_avqite},
      {"spectra", "Spectral function, self-energy and Z of a converged state (--input)", cmd_spectra},
      {"measure-dm", "Sample the density matrix of an ansatz under noise (--input, optional --state)",
       cmd_measure_dm},
      {"iceberg", "Sweep Iceberg syndrome rounds and noise scales for an ansatz (--input)", cmd_iceberg},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "JSON config overlaid on the built-in defaults")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "Seed for sampling and the seeded starting point");
    sub->add_option("--input", input, "Input file")->check(CLI::ExistingFile);
    if (std::string(c.name) == "measure-dm") {
      sub->add_option("--state", state, "Converged state for Z and band weight")->check(CLI::ExistingFile);
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kInvalidConfig;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      CommandArgs args;
      const auto user = config_path.empty() ? nlohmann::json() : read_json_file(config_path);
      std::optional<std::uint64_t> seed_override;
      if (subs[i]->count("--seed")) seed_override = seed;
      args.config = resolve_config(user, seed_override);
      if (!out_dir.empty()) {
        args.config.out_dir = out_dir;
        args.config.resolved["output"]["directory"] = out_dir;
      }
      if (!input.empty()) args.input = input;
      if (!state.empty()) args.state = state;
      return commands[i].fn(args);
    } catch (const ConfigError& e) {
      std::cerr << "invalid configuration: " << e.what() << "\n";
      return kInvalidConfig;
    } catch (const std::exception& e) {
      std::cerr << commands[i].name << " failed: " << e.what() << "\n";
      return kFailure;
    }
  }
  return kInvalidConfig;
}
