#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ghost/embedding.hpp"
#include "ghost/pauli.hpp"

namespace ghost {

/// Occupation bitstrings with N = B+1 particles and S_z = 0, ascending as
/// integers (bit q = mode q of the ModeLayout).
struct SectorBasis {
  std::size_t bath = 0;
  std::vector<std::uint64_t> states;

  std::size_t size() const { return states.size(); }
  std::size_t n_modes() const { return 2 * (bath + 1); }
  // Position of a bitstring, or size() when it lies outside the sector.
  std::size_t index_of(std::uint64_t bits) const;
};

SectorBasis build_basis(std::size_t bath);

/// Real amplitudes over a sector basis; the embedding Hamiltonian is real
/// symmetric so its ground state can always be chosen real.
struct ManyBodyState {
  SectorBasis basis;
  Eigen::VectorXd amplitudes;
};

struct GroundState {
  double energy = 0.0;
  ManyBodyState state;
  double spin_squared = 0.0;
  double gap = 0.0;  // E1 - E0 inside the sector
};

/// Sector Hamiltonian built directly on occupation bitstrings, including the
/// g S^2 penalty (the number penalty vanishes inside the sector).
Eigen::MatrixXd sector_hamiltonian(const EmbeddingParams& params, const SectorBasis& basis);
Eigen::MatrixXd sector_spin_squared(const SectorBasis& basis);

// Throws std::logic_error if the assembled matrix is not symmetric.
GroundState ground_state(const EmbeddingParams& params);

/// Per-spin one-particle density matrices rho_{mu nu,s} = <a†_mu,s a_nu,s>.
struct SpinDensity {
  Eigen::MatrixXd up;
  Eigen::MatrixXd down;
};

SpinDensity density_matrix(const ManyBodyState& state);
double double_occupancy(const ManyBodyState& state);

/// Same observables for a full 2^{2(B+1)} statevector (qubit q = mode q).
/// Complex states contribute the real part of each entry.
SpinDensity density_matrix(const Eigen::VectorXcd& psi, const ModeLayout& layout);
SpinDensity density_matrix(const Eigen::VectorXd& psi, const ModeLayout& layout);
double double_occupancy(const Eigen::VectorXd& psi, const ModeLayout& layout);
double double_occupancy(const Eigen::VectorXcd& psi, const ModeLayout& layout);

/// Embeds a sector state into the full qubit register.
Eigen::VectorXd to_full_space(const ManyBodyState& state);

struct DmErrorMetrics {
  std::vector<double> entries;  // |rho_m - rho_ref| over upper triangles, then docc
  double max_error = 0.0;
  double trace_distance = 0.0;  // half the Frobenius norm of the difference
};

/// Blocks are compared pairwise; shapes must agree.
DmErrorMetrics dm_error_metrics(const std::vector<Eigen::MatrixXd>& measured,
                                const std::vector<Eigen::MatrixXd>& reference,
                                std::optional<std::pair<double, double>> docc = std::nullopt);
DmErrorMetrics dm_error_metrics(const SpinDensity& measured, const SpinDensity& reference,
                                std::optional<std::pair<double, double>> docc = std::nullopt);

}  // namespace ghost
