#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ghost/avqite.hpp"
#include "ghost/iceberg.hpp"
#include "ghost/measurement.hpp"
#include "ghost/sampler.hpp"

namespace ghost::cli {

namespace fs = std::filesystem;

namespace {

// Every file carries the resolved config and the artifact version; nothing
// time-dependent is written, so equal inputs give equal bytes.
class Output {
 public:
  explicit Output(const RunConfig& c) : config_(c), dir_(c.out_dir) { fs::create_directories(dir_); }

  void json(const std::string& name, nlohmann::json body) const {
    if (!config_.writes("json")) return;
    body["config"] = config_.resolved;
    body["version"] = version();
    write(name, body.dump(2) + "\n");
  }

  void jsonl(const std::string& name, const std::vector<nlohmann::json>& lines) const {
    if (!config_.writes("json")) return;
    std::string text = nlohmann::json{{"config", config_.resolved}, {"version", version()}}.dump() + "\n";
    for (const auto& l : lines) text += l.dump() + "\n";
    write(name, text);
  }

  void csv(const std::string& name, const std::string& body) const {
    if (!config_.writes("csv")) return;
    write(name, "# ghost-embed " + std::string(version()) + "\n# config: " + config_.resolved.dump() + "\n" + body);
  }

  void qasm(const std::string& name, const std::string& body) const {
    if (!config_.writes("qasm")) return;
    write(name, "// ghost-embed " + std::string(version()) + "\n// config: " + config_.resolved.dump() + "\n" + body);
  }

 private:
  void write(const std::string& name, const std::string& text) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << text;
  }

  const RunConfig& config_;
  fs::path dir_;
};

nlohmann::json strip_metadata(nlohmann::json j) {
  j.erase("config");
  j.erase("version");
  return j;
}

std::optional<double> try_qp_weight(const Eigen::VectorXd& R, const Eigen::MatrixXd& lambda) {
  try {
    return qp_weight(gauge_blocks(R, lambda));
  } catch (const GaugeUndefined&) {
  } catch (const DivergentWeight&) {
  }
  return std::nullopt;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

SelfConsistencyResult run_self_consistency(const RunConfig& c, const ImpuritySolver& solver,
                                           std::vector<std::string>& warnings) {
  auto cfg = c.self_consistency;
  cfg.warn = [&](const std::string& w) { warnings.push_back(w); };
  return self_consistency(c.U, c.B, solver, cfg);
}

SelfConsistencyResult load_state(const std::string& path) {
  try {
    return SelfConsistencyResult::from_json(strip_metadata(read_json_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not a converged-state file: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

AnsatzState load_ansatz(const std::string& path) {
  try {
    return AnsatzState::from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path + "' is not an ansatz file: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

std::size_t bath_of(const AnsatzState& a) {
  if (a.n_qubits < 4 || a.n_qubits % 4 != 0) {
    throw ConfigError("ansatz width " + std::to_string(a.n_qubits) + " is not an embedding register 2(B+1) with odd B");
  }
  return a.n_qubits / 2 - 1;
}

NoiseModel noise_at(const RunConfig& c, double scale) {
  NoiseModel nm = c.noise;
  nm.noise_scale = scale;
  return nm;
}

std::vector<std::string> eps_labels(const ModeLayout& layout) {
  std::vector<std::string> out;
  for (const char* spin : {"up", "down"})
    for (std::size_t i = 0; i < layout.orbitals(); ++i)
      for (std::size_t j = i; j < layout.orbitals(); ++j)
        out.push_back(std::string(spin) + "(" + std::to_string(i) + "," + std::to_string(j) + ")");
  out.push_back("docc");
  return out;
}

nlohmann::json ansatz_file(const AnsatzState& a) {
  auto j = a.to_json();
  j["N_theta"] = a.n_params();
  j["D"] = a.depth();
  j["n_2q"] = transpile(a.circuit()).n_2q;
  return j;
}

int avqite_toy(const CommandArgs& args, const nlohmann::json& input) {
  for (const auto& [k, _] : input.items()) {
    if (k != "hamiltonian" && k != "pool" && k != "reference") throw ConfigError("Hamiltonian file: unknown key '" + k + "'");
  }
  const PauliSum h = PauliSum::from_json(input.at("hamiltonian"));
  const std::size_t n = h.n_qubits();
  std::vector<PauliString> pool;
  if (input.contains("pool")) {
    for (const auto& s : input["pool"]) pool.push_back(PauliString::parse(s.get<std::string>()));
  } else {
    pool = build_pool(n);
  }
  AnsatzState init;
  init.n_qubits = n;
  const std::string ref = input.value("reference", std::string(n, '0'));
  if (ref.size() != n) throw ConfigError("Hamiltonian file: reference length differs from the register");
  for (std::size_t q = 0; q < n; ++q)
    if (ref[q] == '1') init.reference |= std::uint64_t{1} << q;

  const auto res = run(real_hamiltonian(h), pool, init, args.config.avqite);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.to_dense(), Eigen::EigenvaluesOnly);
  Output out(args.config);
  out.json("avqite.json", {{"energy", res.energy},
                           {"exact_energy", es.eigenvalues()[0]},
                           {"steps", res.steps},
                           {"termination", termination_name(res.reason)},
                           {"N_theta", res.ansatz.n_params()},
                           {"D", res.ansatz.depth()}});
  out.json("ansatz_final.json", ansatz_file(res.ansatz));
  std::cerr << "avqite: E = " << res.energy << " (exact " << es.eigenvalues()[0] << "), N_theta = "
            << res.ansatz.n_params() << "\n";
  return kOk;
}

}  // namespace

int cmd_selfconsist(const CommandArgs& args) {
  const auto& c = args.config;
  const ImpuritySolver solver = c.solver_kind == "ed" ? ed_solver() : avqite_solver(c.avqite);
  std::vector<std::string> warnings;
  const auto res = run_self_consistency(c, solver, warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  const auto Z = try_qp_weight(res.state.R, res.state.lambda);
  auto state = res.to_json();
  state["Z"] = optional_json(Z);
  state["warnings"] = warnings;
  Output out(c);
  out.json("state.json", state);
  out.json("embedding_params.json", res.params.to_json());
  out.csv("history.csv", res.history_csv());

  std::cerr << "selfconsist: U = " << c.U << ", B = " << c.B << ", docc = " << res.double_occupancy
            << ", Z = " << (Z ? std::to_string(*Z) : "undefined") << ", iterations = " << res.history.size()
            << (res.converged ? "" : " (not converged)") << "\n";
  return res.converged ? kOk : kNotConverged;
}

int cmd_avqite(const CommandArgs& args) {
  const auto& c = args.config;
  EmbeddingParams params;
  Eigen::MatrixXd gauge;
  if (args.input) {
    const auto j = strip_metadata(read_json_file(*args.input));
    if (j.contains("hamiltonian")) return avqite_toy(args, j);
    try {
      if (j.contains("R") && j.contains("lambda")) {
        const auto st = SelfConsistencyResult::from_json(j);
        params = st.params;
        gauge = st.gauge;
      } else {
        params = EmbeddingParams::from_json(j);
      }
    } catch (const std::exception& e) {
      throw ConfigError("'" + *args.input + "': " + e.what());
    }
  } else {
    std::vector<std::string> warnings;
    const auto sc = run_self_consistency(c, ed_solver(), warnings);
    if (!sc.converged) {
      std::cerr << "avqite: the ED self-consistency did not converge\n";
      return kNotConverged;
    }
    params = sc.params;
    gauge = sc.gauge;
  }

  EmbeddingRun r;
  try {
    r = run_embedding(params, c.avqite, c.eps_threshold, gauge);
  } catch (const AdaptationStall& e) {
    std::cerr << "avqite: adaptation stalled: " << e.what() << " (L2 = " << e.L2 << ")\n";
    return kStall;
  }

  Output out(c);
  std::vector<nlohmann::json> lines;
  std::ostringstream traj;
  traj.precision(12);
  traj << "step,D,N_theta,energy,eps_dm_max,infidelity,reason\n";
  for (const auto& cp : r.checkpoints) {
    lines.push_back(cp.to_json());
    traj << cp.step << ',' << cp.depth << ',' << cp.n_params << ',' << cp.energy << ',' << cp.eps_dm_max << ','
         << cp.infidelity << ',' << cp.reason << '\n';
  }
  out.jsonl("checkpoints.jsonl", lines);
  out.csv("trajectory.csv", traj.str());
  out.json("ansatz_final.json", ansatz_file(r.result.ansatz));
  out.qasm("ansatz_final.qasm", to_qasm(r.result.ansatz.circuit()));

  nlohmann::json snapshots = nlohmann::json::object();
  for (auto d : c.snapshot_depths) {
    const auto it = r.last_at_depth.find(d);
    if (it == r.last_at_depth.end()) continue;
    const std::string tag = "D" + std::to_string(d);
    auto info = ansatz_file(it->second);
    if (it->second.n_qubits == 8) info["n_2q_encoded"] = encode_circuit(it->second, 0).n_2q;
    out.json("ansatz_" + tag + ".json", ansatz_file(it->second));
    out.qasm("ansatz_" + tag + ".qasm", to_qasm(it->second.circuit()));
    info.erase("generators");
    info.erase("reference");
    snapshots[tag] = info;
  }
  nlohmann::json first = nullptr;
  if (r.first_below_threshold) {
    first = r.first_below_threshold->to_json();
    out.json("ansatz_threshold.json", ansatz_file(r.first_below_threshold->ansatz));
  }
  out.json("avqite.json", {{"ed_energy", r.ed_energy},
                           {"energy", r.result.energy},
                           {"steps", r.result.steps},
                           {"termination", termination_name(r.result.reason)},
                           {"N_theta", r.result.ansatz.n_params()},
                           {"D", r.result.ansatz.depth()},
                           {"first_below_threshold", first},
                           {"snapshots", snapshots}});
  std::cerr << "avqite: E = " << r.result.energy << " (ED " << r.ed_energy << "), N_theta = "
            << r.result.ansatz.n_params() << ", D = " << r.result.ansatz.depth() << ", "
            << termination_name(r.result.reason) << "\n";
  return kOk;
}

int cmd_spectra(const CommandArgs& args) {
  if (!args.input) throw ConfigError("spectra needs --input <state file>");
  const auto& c = args.config;
  const auto st = load_state(*args.input);
  const auto s = compute_spectra(st.state.R, st.state.lambda, c.freq, QuadratureGrid::semicircle(c.n_nodes));
  std::optional<double> Z, Z_slope;
  std::optional<std::string> z_error;
  try {
    const auto g = gauge_blocks(st.state.R, st.state.lambda);
    Z = qp_weight(g);
    Z_slope = qp_weight_slope(g);
  } catch (const std::exception& e) {
    z_error = e.what();
  }
  const Eigen::VectorXd A = s.spectral_function();
  std::vector<double> peaks;
  for (auto i : local_maxima(A)) peaks.push_back(s.freq.omega[i]);

  Output out(c);
  out.csv("spectra.csv", s.csv());
  nlohmann::json summary{{"Z", optional_json(Z)},
                         {"Z_slope", optional_json(Z_slope)},
                         {"sigma_available", s.sigma.has_value()},
                         {"sum_rule", s.sum_rule()},
                         {"norm_R2", st.state.R.squaredNorm()},
                         {"peaks", peaks},
                         {"hubbard_band_weight", band_weight(s, 0.5 * st.U - 0.5, 0.5 * st.U + 0.5)}};
  if (z_error) summary["Z_error"] = *z_error;
  out.json("spectra.json", summary);
  std::cerr << "spectra: Z = " << (Z ? std::to_string(*Z) : "undefined") << ", sum rule " << s.sum_rule() << "\n";
  return kOk;
}

int cmd_measure_dm(const CommandArgs& args) {
  if (!args.input) throw ConfigError("measure-dm needs --input <ansatz file>");
  const auto& c = args.config;
  const auto ansatz = load_ansatz(*args.input);
  const ModeLayout layout(bath_of(ansatz));
  const std::size_t M = c.iceberg_enabled ? c.iceberg_M : 0;
  DmMeasurement m;
  try {
    m = measure_density(ansatz, layout, M, c.shots, c.seed, c.noise);
  } catch (const LowSuccessRate& e) {
    std::cerr << "measure-dm: " << e.what() << " (" << e.accepted << " of " << e.submitted << " accepted)\n";
    return kFailure;
  }
  auto body = m.to_json();
  body["M"] = M;
  body["noise_scale"] = c.noise.noise_scale;
  if (args.state) {
    const auto st = load_state(*args.state);
    const auto qp = quasiparticle_from_density(st, m.measured.rho, c.n_nodes);
    const auto exact = quasiparticle_from_density(st, m.reference.rho, c.n_nodes);
    body["Z"] = qp.Z;
    body["Z_exact"] = exact.Z;
    body["hubbard_band_weight"] = hubbard_band_weight(qp, st.U, c.freq, c.n_nodes);
    body["hubbard_band_weight_exact"] = hubbard_band_weight(exact, st.U, c.freq, c.n_nodes);
    std::vector<double> R(qp.R.data(), qp.R.data() + qp.R.size());
    body["R"] = R;
  }
  Output out(c);
  out.json("dm.json", body);
  std::ostringstream csv;
  csv.precision(12);
  csv << "entry,eps\n";
  const auto labels = eps_labels(layout);
  for (std::size_t i = 0; i < m.metrics.entries.size(); ++i) csv << labels[i] << ',' << m.metrics.entries[i] << '\n';
  out.csv("dm_eps.csv", csv.str());
  std::cerr << "measure-dm: eps max " << m.eps.max << ", median " << m.eps.median << ", delta "
            << m.metrics.trace_distance << "\n";
  return kOk;
}

int cmd_iceberg(const CommandArgs& args) {
  if (!args.input) throw ConfigError("iceberg needs --input <ansatz file>");
  const auto& c = args.config;
  const auto ansatz = load_ansatz(*args.input);
  const ModeLayout layout(bath_of(ansatz));
  if (ansatz.n_qubits != 8) throw ConfigError("iceberg: the [[10, 8, 2]] layout needs an 8-qubit ansatz");

  std::ostringstream csv;
  csv.precision(12);
  csv << "noise_scale,M,status,shots_submitted,shots_accepted,success_rate,delta_dm,eps_min,eps_q1,eps_median,eps_q3,"
         "eps_max,n_2q\n";
  auto cells = nlohmann::json::array();
  for (double scale : c.sweep_noise_scales) {
    for (auto M : c.sweep_M) {
      const std::size_t n_2q = M == 0 ? transpile(ansatz.circuit()).n_2q : encode_circuit(ansatz, M).n_2q_total;
      nlohmann::json cell{{"M", M}, {"noise_scale", scale}, {"n_2q", n_2q}};
      try {
        const auto m = measure_density(ansatz, layout, M, c.shots, c.seed, noise_at(c, scale));
        cell["status"] = "ok";
        cell["shots_submitted"] = m.submitted;
        cell["shots_accepted"] = m.accepted;
        cell["success_rate"] = m.success_rate();
        cell["eps_dm"] = m.metrics.entries;
        cell["eps_dm_box"] = m.eps.to_json();
        cell["delta_dm"] = m.metrics.trace_distance;
        csv << scale << ',' << M << ",ok," << m.submitted << ',' << m.accepted << ',' << m.success_rate() << ','
            << m.metrics.trace_distance << ',' << m.eps.min << ',' << m.eps.q1 << ',' << m.eps.median << ','
            << m.eps.q3 << ',' << m.eps.max << ',' << n_2q << '\n';
      } catch (const LowSuccessRate& e) {
        cell["status"] = "aborted";
        cell["shots_submitted"] = e.submitted;
        cell["shots_accepted"] = e.accepted;
        cell["success_rate"] = e.submitted ? double(e.accepted) / double(e.submitted) : 0.0;
        csv << scale << ',' << M << ",aborted," << e.submitted << ',' << e.accepted << ','
            << cell["success_rate"].get<double>() << ",nan,nan,nan,nan,nan,nan," << n_2q << '\n';
      }
      std::cerr << "iceberg: noise_scale " << scale << ", M " << M << ": " << cell["status"].get<std::string>() << "\n";
      cells.push_back(cell);
    }
  }
  Output out(c);
  out.csv("iceberg_sweep.csv", csv.str());
  out.json("iceberg.json", {{"cells", cells}});
  return kOk;
}

}  // namespace ghost::cli
