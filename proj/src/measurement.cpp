#include "ghost/measurement.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "ghost/iceberg.hpp"

namespace ghost {

nlohmann::json BoxStats::to_json() const {
  return {{"min", min}, {"q1", q1}, {"median", median}, {"q3", q3}, {"max", max}};
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("box_stats: empty sample");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double pos = p * double(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

std::vector<PauliString> density_strings(const ModeLayout& layout) {
  const auto obs = density_matrix_observables(layout);
  std::vector<PauliString> out;
  auto collect = [&](const PauliSum& op) {
    for (const auto& [p, c] : op.terms()) {
      if (!p.is_identity() && std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  };
  for (const auto& e : obs.entries) collect(e.op);
  collect(obs.double_occupancy);
  return out;
}

DensityEstimate assemble_density(const ModeLayout& layout, const std::function<double(const PauliString&)>& value) {
  const auto obs = density_matrix_observables(layout);
  auto evaluate = [&](const PauliSum& op) {
    double acc = 0.0;
    for (const auto& [p, c] : op.terms()) acc += c.real() * (p.is_identity() ? 1.0 : value(p));
    return acc;
  };
  const auto L = static_cast<Eigen::Index>(layout.orbitals());
  DensityEstimate out;
  out.rho.up = Eigen::MatrixXd::Zero(L, L);
  out.rho.down = Eigen::MatrixXd::Zero(L, L);
  for (const auto& e : obs.entries) {
    auto& m = e.spin == 0 ? out.rho.up : out.rho.down;
    const double v = evaluate(e.op);
    m(e.mu, e.nu) = v;
    m(e.nu, e.mu) = v;
  }
  out.double_occupancy = evaluate(obs.double_occupancy);
  return out;
}

DensityEstimate exact_density(const AnsatzState& ansatz, const ModeLayout& layout) {
  const Eigen::VectorXd psi = ansatz.state();
  return {density_matrix(psi, layout), double_occupancy(psi, layout)};
}

nlohmann::json DmMeasurement::to_json() const {
  auto matrix = [](const Eigen::MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> r(m.cols());
      for (Eigen::Index k = 0; k < m.cols(); ++k) r[k] = m(i, k);
      rows.push_back(r);
    }
    return rows;
  };
  return {
      {"rho_up", matrix(measured.rho.up)},
      {"rho_down", matrix(measured.rho.down)},
      {"docc", measured.double_occupancy},
      {"reference_rho_up", matrix(reference.rho.up)},
      {"reference_rho_down", matrix(reference.rho.down)},
      {"reference_docc", reference.double_occupancy},
      {"eps_dm", metrics.entries},
      {"eps_dm_box", eps.to_json()},
      {"delta_dm", metrics.trace_distance},
      {"shots_submitted", submitted},
      {"shots_accepted", accepted},
      {"success_rate", success_rate()},
  };
}

DmMeasurement measure_density(const AnsatzState& ansatz, const ModeLayout& layout, std::size_t rounds,
                              std::size_t shots, std::uint64_t seed, const std::optional<NoiseModel>& noise) {
  if (ansatz.n_qubits != layout.n_qubits()) throw std::invalid_argument("measure_density: layout width mismatch");
  const auto strings = density_strings(layout);
  const auto run = measure_encoded(ansatz, rounds, strings, shots, seed, noise);
  std::map<PauliString, double> values;
  for (std::size_t i = 0; i < strings.size(); ++i) values[strings[i]] = run.values[i];

  DmMeasurement out;
  out.measured = assemble_density(layout, [&](const PauliString& p) { return values.at(p); });
  out.reference = exact_density(ansatz, layout);
  out.metrics = dm_error_metrics(out.measured.rho, out.reference.rho,
                                 std::make_pair(out.measured.double_occupancy, out.reference.double_occupancy));
  out.eps = box_stats(out.metrics.entries);
  out.submitted = run.submitted;
  out.accepted = run.accepted;
  return out;
}

QuasiparticleEstimate quasiparticle_from_density(const SelfConsistencyResult& sc, const SpinDensity& rho,
                                                 std::size_t n_nodes) {
  const auto grid = QuadratureGrid::semicircle(n_nodes);
  const auto setup = embedding_setup(sc.U, sc.state, grid, sc.params.g);
  const Eigen::Index B = setup.D.size();
  if (rho.up.rows() != B + 1) throw std::invalid_argument("quasiparticle_from_density: bath size mismatch");
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(B + 1, B + 1);
  T.block(1, 1, B, B) = setup.gauge;
  const Eigen::MatrixXd rho_orig = T * (0.5 * (rho.up + rho.down)) * T.transpose();
  const Eigen::VectorXd hop = rho_orig.block(0, 1, 1, B).transpose();
  // The bath occupations are pinned to the lattice Delta at self-consistency;
  // only the impurity-bath amplitudes are taken from the measurement.
  const Eigen::MatrixXd f = sqrt_delta_factor(setup.moments.delta);
  QuasiparticleEstimate out;
  out.R = f.ldlt().solve(hop);
  out.lambda = lambda_update(setup.lambda_c, setup.moments.delta, setup.D, out.R);
  out.Z = qp_weight(gauge_blocks(out.R, out.lambda));
  return out;
}

double hubbard_band_weight(const QuasiparticleEstimate& qp, double U, const FrequencyGrid& freq, std::size_t n_nodes) {
  const auto s = compute_spectra(qp.R, qp.lambda, freq, QuadratureGrid::semicircle(n_nodes));
  return band_weight(s, 0.5 * U - 0.5, 0.5 * U + 0.5);
}

}  // namespace ghost
