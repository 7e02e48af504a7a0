#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ghost/avqite.hpp"
#include "ghost/fock_ed.hpp"
#include "ghost/qsim.hpp"
#include "ghost/self_consistency.hpp"
#include "ghost/spectra.hpp"
#include "json.hpp"

namespace ghost {

/// Box-plot summary with linearly interpolated quartiles.
struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  nlohmann::json to_json() const;
};

BoxStats box_stats(std::vector<double> values);

/// Distinct non-identity Pauli strings behind the density-matrix entries and
/// the impurity double occupancy, in first-appearance order.
std::vector<PauliString> density_strings(const ModeLayout& layout);

struct DensityEstimate {
  SpinDensity rho;
  double double_occupancy = 0.0;
};

/// Rebuilds rho and docc from per-string expectation values.
DensityEstimate assemble_density(const ModeLayout& layout, const std::function<double(const PauliString&)>& value);

DensityEstimate exact_density(const AnsatzState& ansatz, const ModeLayout& layout);

struct DmMeasurement {
  DensityEstimate measured;
  DensityEstimate reference;  // noiseless statevector of the same circuit
  DmErrorMetrics metrics;     // eps_DM entries and delta_DM (trace_distance)
  BoxStats eps;
  std::size_t submitted = 0;
  std::size_t accepted = 0;
  double success_rate() const { return submitted ? double(accepted) / double(submitted) : 0.0; }
  nlohmann::json to_json() const;
};

/// Samples the density strings of `ansatz` with `rounds` Iceberg syndrome
/// rounds (0 = unencoded) and compares against the exact circuit state.
DmMeasurement measure_density(const AnsatzState& ansatz, const ModeLayout& layout, std::size_t rounds,
                              std::size_t shots, std::uint64_t seed, const std::optional<NoiseModel>& noise);

/// R and lambda from a measured density matrix (solver gauge, spin averaged)
/// at a converged self-consistent point: R = f(Delta)^{-1} <c+ b> with the
/// lattice Delta, followed by the lambda update.
struct QuasiparticleEstimate {
  Eigen::VectorXd R;
  Eigen::MatrixXd lambda;
  double Z = 0.0;
};

QuasiparticleEstimate quasiparticle_from_density(const SelfConsistencyResult& sc, const SpinDensity& rho,
                                                 std::size_t n_nodes = 1000);

/// Spectral weight of the Hubbard bands, |omega| within 0.5 of U/2.
double hubbard_band_weight(const QuasiparticleEstimate& qp, double U, const FrequencyGrid& freq,
                           std::size_t n_nodes = 1000);

}  // namespace ghost
